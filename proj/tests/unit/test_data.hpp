#pragma once

#include <string>

#include "iecclone/plcopen.hpp"

inline std::string samplePath(const std::string& name) {
  return std::string(IECCLONE_DATA_DIR) + "/samples/" + name;
}

inline iecclone::Project loadSample(const std::string& name) {
  return iecclone::loadProject(samplePath(name)).project;
}
