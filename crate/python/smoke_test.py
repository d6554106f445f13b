"""Smoke test for the reqprio Python module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o target/wheels
    pip install target/wheels/reqprio-*.whl
"""

import json
import math
import pathlib

import reqprio

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def close(a, b, tol=1e-9):
    return math.isclose(a, b, abs_tol=tol)


def main():
    single = reqprio.Project.load(DATA / "single-user.json")
    rows = single.prioritize("single")
    assert [r[0] for r in rows] == ["r1", "r3", "r2"], rows
    assert all(close(u, e) for (_, u, _), e in zip(rows, [6.9, 6.6, 3.1])), rows
    assert [r[2] for r in rows] == [1, 2, 3]

    bugs = reqprio.example("bugzilla")
    rows = reqprio.prioritize(bugs, "oss", "s1")
    assert [(r, round(u, 9), k) for r, u, k in rows] == [("r1", 6.0, 1), ("r2", 3.3, 2), ("r3", 2.0, 3)], rows

    group = reqprio.example("group")
    assert close(reqprio.group_weight(group, "profit"), (0.5 + 0.3 + 0.6) / 3)
    assert reqprio.prioritize(group)[0][0] == "r2"

    check = reqprio.diagnose(reqprio.example("dependencies"))
    assert not check["consistent"]
    assert [[c["label"] for c in d["constraints"]] for d in check["diagnoses"]] == [["p2"]]
    assert check["repair"]["replacement_order"][0] == "r3"

    assert close(reqprio.utility({"profit": 10, "risk": 5}, {"profit": 0.3, "risk": 0.7}), 6.5)
    assert close(reqprio.jaccard({"ui", "editor"}, {"editor", "save"}), 1 / 3)

    export = (DATA / "tracker-export.json").read_text()
    ingested = reqprio.ingest(export)
    assert ingested.requirement_ids == ["101", "102", "JDT-103"]
    assert ingested.validate() == []

    broken = json.loads(single.to_json())
    broken["evaluations"][0]["value"] = -1
    violations = reqprio.Project.from_json(json.dumps(broken)).validate()
    assert violations[0]["code"] == "negative_value", violations
    assert violations[0]["path"] == "evaluations[0].value"

    try:
        reqprio.prioritize(reqprio.Project())
    except reqprio.ReqprioError as e:
        assert "no requirements" in str(e)
    else:
        raise AssertionError("empty project was ranked")

    print("ok")


if __name__ == "__main__":
    main()
