import io
import json

import pytest

from modelmatch.canonical import save_spec
from modelmatch.cli import run

from conftest import build_inconsistent_model, build_query_model, build_split_model


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def model_files(tmp_path):
    paths = {}
    for name, spec in (
        ("q", build_query_model()),
        ("r1", build_inconsistent_model()),
        ("r2", build_split_model()),
    ):
        path = tmp_path / f"{name}.rsq"
        save_spec(spec, path)
        paths[name] = str(path)
    return paths


def test_repo_init_add_query_identity(tmp_path, model_files):
    repo = str(tmp_path / "repo")
    assert invoke("repo", "init", repo)[0] == 0
    code, out = invoke("repo", "add", repo, model_files["q"], "--use-stem-id")
    assert code == 0 and "added" in out
    code, out = invoke(
        "query", repo, model_files["q"], "--seed", "42", "--format", "records"
    )
    assert code == 0
    first = out.splitlines()[0]
    assert first.startswith("rank=1 model=q aggregate=1.000000")


def test_query_orders_fixture_models(tmp_path, model_files):
    repo = str(tmp_path / "repo")
    invoke("repo", "init", repo)
    invoke("repo", "add", repo, model_files["r1"], model_files["r2"], "--use-stem-id")
    code, out = invoke("query", repo, model_files["q"], "--format", "records")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("rank=1 model=r2")
    assert lines[1].startswith("rank=2 model=r1")


def test_match_exhaustive_explain(model_files):
    code, out = invoke(
        "match", model_files["q"], model_files["r1"], "--method", "exhaustive", "--explain"
    )
    assert code == 0
    assert "aggregate" in out
    agg = float(next(l for l in out.splitlines() if "aggregate" in l).split(":")[1])
    assert agg < 1.0
    # every mapped class pair is listed exactly once
    lines = out.splitlines()
    start = lines.index("  mapped classes:") + 1
    pair_lines = []
    for line in lines[start:]:
        if not line.startswith("    "):
            break
        pair_lines.append(line.strip())
    left_ids = sorted(line.split()[0] for line in pair_lines)
    assert left_ids == ["A", "B", "C"]
    assert out.count("s1 <-> s1") == 1


def test_match_output_is_byte_identical_across_runs(model_files):
    args = ("match", model_files["q"], model_files["r2"], "--seed", "7")
    assert invoke(*args) == invoke(*args)


def test_query_missing_file_is_domain_error(tmp_path, model_files, capsys):
    repo = str(tmp_path / "repo")
    invoke("repo", "init", repo)
    code, _ = invoke("query", repo, str(tmp_path / "nope.rsq"))
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error(capsys):
    code, _ = invoke("frobnicate")
    assert code == 2


def test_repo_list_formats(tmp_path, model_files):
    repo = str(tmp_path / "repo")
    invoke("repo", "init", repo)
    invoke("repo", "add", repo, model_files["q"], "--use-stem-id")
    code, table = invoke("repo", "list", repo)
    assert code == 0 and "q" in table and "1 model(s)" in table
    code, records = invoke("repo", "list", repo, "--format", "records")
    assert code == 0 and records.startswith("model=q classes=3")


def test_gen_corpus_and_eval_flow(tmp_path):
    corpus_dir = tmp_path / "corpus"
    code, out = invoke(
        "gen-corpus", str(corpus_dir), "--bases", "3", "--variants", "2",
        "--ops", "1", "--seed", "9",
    )
    assert code == 0 and "9 models" in out
    assert (corpus_dir / "judgments.txt").exists()
    assert len(list((corpus_dir / "models").glob("*.rsq"))) == 9
    assert len(list((corpus_dir / "queries").glob("*.rsq"))) == 3

    repo = str(tmp_path / "repo")
    invoke("repo", "init", repo)
    for path in sorted((corpus_dir / "models").glob("*.rsq")):
        code, _ = invoke("repo", "add", repo, str(path), "--use-stem-id")
        assert code == 0
    code, report = invoke(
        "eval", repo,
        "--judgments", str(corpus_dir / "judgments.txt"),
        "--queries", str(corpus_dir / "queries"),
        "--format", "records",
        "--pop", "24", "--gens", "40",
    )
    assert code == 0
    assert "map=" in report


def test_import_xmi_command(tmp_path):
    xmi = tmp_path / "model.xmi"
    xmi.write_text(
        '<?xml version="1.0"?>'
        '<xmi:XMI xmlns:xmi="http://www.omg.org/spec/XMI/20110701" '
        'xmlns:uml="http://www.omg.org/spec/UML/20110701">'
        '<uml:Model xmi:id="m" name="Mini">'
        '<packagedElement xmi:type="uml:Class" xmi:id="c1" name="Thing"/>'
        "</uml:Model></xmi:XMI>"
    )
    out_file = tmp_path / "mini.rsq"
    code, out = invoke("import-xmi", str(xmi), str(out_file))
    assert code == 0
    assert "imported 1 classes" in out
    assert out_file.exists()


def test_config_file_and_env_fallback(tmp_path, model_files, monkeypatch):
    cfg = tmp_path / "engine.json"
    cfg.write_text(json.dumps({"weights": {"structural": 1, "functional": 0, "behavioral": 0}}))
    code, out = invoke(
        "match", model_files["q"], model_files["r1"],
        "--method", "exhaustive", "--format", "records", "--config", str(cfg),
    )
    assert code == 0
    fields = dict(kv.split("=") for kv in out.split())
    assert float(fields["aggregate"]) == pytest.approx(float(fields["structural"]))
    monkeypatch.setenv("MODELMATCH_CONFIG", str(cfg))
    code, out2 = invoke(
        "match", model_files["q"], model_files["r1"], "--method", "exhaustive",
        "--format", "records",
    )
    assert code == 0 and out2 == out


def test_weights_flag_overrides(model_files):
    code, out = invoke(
        "match", model_files["q"], model_files["r1"],
        "--method", "exhaustive", "--weights", "0,1,0", "--format", "records",
    )
    assert code == 0
    fields = dict(kv.split("=") for kv in out.split())
    assert float(fields["aggregate"]) == pytest.approx(float(fields["functional"]))
