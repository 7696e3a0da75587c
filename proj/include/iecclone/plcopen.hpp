#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iecclone/model.hpp"
#include "iecclone/st_parser.hpp"

namespace iecclone {

struct ParseWarning {
  std::string locator;  // e.g. "pous/MAIN/body/FBD", or "" for the project
  std::string message;
};

struct ParseReport {
  std::vector<ParseWarning> warnings;
  std::size_t skippedElements = 0;
};

struct ParsedProject {
  Project project;
  ParseReport report;
};

/// Project name used when the document does not carry one.
inline constexpr std::string_view kFallbackProjectName = "Project";

/// Parses a PLCopen XML (TC6) document. Throws ParseError for malformed XML
/// or ST, and UnsupportedConstructError for Instruction List bodies.
ParsedProject parseProject(std::string_view xml);

/// Reads and parses a file; I/O failures are reported as ParseError.
ParsedProject loadProject(const std::string& path);

/// Serializes a project as PLCopen XML. Projects obtained from parseProject
/// (and mutants of them) read back equal. Layout is synthetic: positions
/// are omitted and graphical languages are wired through explicit
/// connections only.
std::string writeProject(const Project& project);

/// Writes writeProject(project) to a file; throws std::runtime_error on I/O
/// failure.
void saveProject(const Project& project, const std::string& path);

}  // namespace iecclone
