import json
import os

import pytest

import iecclone

SAMPLES = os.path.join(os.path.dirname(__file__), "..", "..", "data", "samples")


def sample(name):
    return iecclone.load_project(os.path.join(SAMPLES, name))


def test_load_and_round_trip():
    p = sample("sfc_nested.xml")
    assert p.name == "TankProject"
    assert p.pou_names == ["FillTank"]
    assert p.check() == []
    assert iecclone.parse_project(p.to_xml()) == p


def test_self_similarity():
    p = sample("ld_fbd.xml")
    for metric in ("fine", "coarse"):
        assert iecclone.similarity(p, p, metric) == pytest.approx(1.0, abs=1e-9)


def test_family_model_report():
    a, b = sample("example.xml"), sample("example_variant.xml")
    doc = json.loads(iecclone.family_model(a, b))
    assert doc["lambda"] == 1.0
    assert doc["root"]["category"] == "alternative"
    text = iecclone.family_model(a, b, format="text")
    assert "? Variable C : INT" in text


def test_clone_candidates():
    labels = {(l, r): label for l, r, _, label in iecclone.clone_candidates(sample("clones.xml"))}
    assert labels[("pous/Conveyor", "pous/ConveyorCopy")] == "identical"
    assert iecclone.clone_candidates(sample("unrelated.xml")) == []


def test_mutate_and_evaluate():
    seed = sample("clones.xml")
    mutant, context = iecclone.mutate(seed, "t3", 1, 7)
    assert mutant != seed
    assert json.loads(context)["category"] == "T3"
    outcome = iecclone.evaluate(seed, mutant, context)
    assert outcome["fp"] == 0
    assert outcome["tp"] + outcome["fn"] == len(json.loads(context)["records"])


def test_campaign():
    seeds = [sample("example.xml"), sample("clones.xml")]
    r = iecclone.campaign(seeds, iterations=50, category="t2", jobs=2, rng_seed=3)
    assert r["iterations"] == 50
    assert r["precision"] == 1.0


def test_greedy_match():
    assert iecclone.greedy_match([[1.0, 0.5], [0.5, 1.0]]) == [(0, 0, 1.0), (1, 1, 1.0)]


def test_catalog():
    ids = [a for a, _, _ in iecclone.attribute_catalog()]
    assert "st-statement-count" in ids
    assert len(ids) == len(set(ids))


def test_errors():
    with pytest.raises(iecclone.ParseError):
        iecclone.parse_project("<project>")
    with pytest.raises(iecclone.Error):
        iecclone.load_project(os.path.join(SAMPLES, "missing.xml"))
    with pytest.raises(ValueError):
        iecclone.mutate(sample("example.xml"), "t9")
    p = sample("example.xml")
    with pytest.raises(iecclone.FamilyModelError):
        iecclone.family_model(p, p, lambda_=0.0)
