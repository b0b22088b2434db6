import json
import pathlib

import pytest

paraqnd = pytest.importorskip("paraqnd")
jsonschema = pytest.importorskip("jsonschema")

SCHEMAS = pathlib.Path(__file__).resolve().parents[2] / "schemas"

RUNS = {
    "povm": {"experiment": "povm-purity", "povm": {"widths": [0.5, 0.25]}},
    "qnd": {
        "experiment": "qnd-protocol",
        "system": {"Delta": 150, "g_tilde": 1},
        "protocol": {"alpha": 0.4},
        "truncation": {"n_signal": 50, "n_pump": 160, "evolved_tolerance": 1e-4},
        "wigner": {"points": 9},
    },
    "gkp": {
        "experiment": "gkp-generate",
        "system": {"Delta": 100, "g_tilde": 1},
        "wigner": {"points": 9, "signal_stride": 8},
    },
    "opo": {
        "experiment": "opo-trajectories",
        "system": {"Delta": 100, "g_tilde": 1.5, "kappa_a": 0.03, "kappa_b": 3},
        "trajectories": {"count": 2, "duration": 3, "record_every": 20},
        "truncation": {"n_blocks": 5},
        "plateau": {"window": 20, "min_length": 20},
    },
    "validate": {"experiment": "validate", "validation": {"criteria": [6]}},
}

SUMMARIES = {
    "povm": "povm_summary",
    "qnd": "qnd_summary",
    "gkp": "gkp_report",
    "opo": "opo_summary",
    "validate": "validation_report",
}


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def csv_header(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return lines[0].split(",")


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    for key, config in RUNS.items():
        paraqnd.run_experiment(config, root / key)
    return root


@pytest.mark.parametrize("key", sorted(RUNS))
def test_manifest_and_summary_match_schemas(outputs, key):
    d = outputs / key
    manifest = json.loads((d / "manifest.json").read_text())
    jsonschema.validate(manifest, schema("manifest"))
    assert manifest["pass"] == all(c["pass"] for c in manifest["checks"])
    if key != "opo":  # a few time units is too short for settled plateaus
        assert manifest["pass"]
    summary = json.loads((d / f"{SUMMARIES[key]}.json").read_text())
    jsonschema.validate(summary, schema(SUMMARIES[key]))


def test_csv_tables_match_catalogue(outputs):
    catalogue = json.loads((SCHEMAS / "csv_tables.json").read_text())
    seen = 0
    for table in catalogue["tables"]:
        names = [c["name"] for c in table["columns"]]
        pattern = table["pattern"].replace("NNN", "[0-9][0-9][0-9]")
        for path in outputs.glob(f"*/{pattern}"):
            assert csv_header(path) == names, path
            seen += 1
    assert seen >= 6


def test_wigner_sidecars(outputs):
    grids = [p for p in outputs.glob("*/*_wigner_*.csv") if not p.name.endswith((".x.csv", ".p.csv"))]
    assert grids
    for grid in grids:
        rows = [l for l in grid.read_text().splitlines() if not l.startswith("#")]
        xs = grid.with_name(grid.stem + ".x.csv")
        ps = grid.with_name(grid.stem + ".p.csv")
        assert csv_header(xs) == ["x"] and csv_header(ps) == ["p"]
        nx = len([l for l in xs.read_text().splitlines() if not l.startswith("#")]) - 1
        np_ = len([l for l in ps.read_text().splitlines() if not l.startswith("#")]) - 1
        assert len(rows) == nx
        assert all(len(r.split(",")) == np_ for r in rows)
