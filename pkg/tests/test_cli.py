"""Command-line flows and exit codes."""

import json

import pytest
from click.testing import CliRunner

from maskner.cli import main

from .conftest import FIXTURES, MUNICH_PROMPT, MUNICH_TOP5

CONFIG = str(FIXTURES / "engine_stub.yaml")
CORPUS = str(FIXTURES / "munich.conll")


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args, **kwargs):
    return runner.invoke(main, list(args), catch_exceptions=False, **kwargs)


# --- tag ---------------------------------------------------------------------


def test_tag_jsonlines_stdout(runner):
    result = invoke(runner, "tag", "--config", CONFIG, "--input", CORPUS)
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    meta = json.loads(lines[0])["meta"]
    assert meta["model"] == "stub"
    assert meta["seed"] == 0
    record = json.loads(lines[1])
    assert record["id"] == "munich.conll:1"
    assert record["spans"][0] == {
        "start": 3,
        "end": 4,
        "label": "LOC",
        "confidence": 0.43,
        "word": "city",
        "source": "base",
    }
    assert f"# config_hash={meta['config_hash']} model=stub seed=0" in result.stderr


def test_tag_conll_stdout(runner):
    result = invoke(runner, "tag", "--config", CONFIG, "--input", CORPUS, "--format", "conll")
    assert result.exit_code == 0
    assert "Munich PROPN B-LOC" in result.stdout.splitlines()
    # meta stays out of band in conll mode
    assert "config_hash" not in result.stdout
    assert "# config_hash=" in result.stderr


def test_tag_output_file(runner, tmp_path):
    out = tmp_path / "preds.jsonl"
    result = invoke(
        runner, "tag", "--config", CONFIG, "--input", CORPUS, "--output", str(out)
    )
    assert result.exit_code == 0
    assert result.stdout == ""
    assert json.loads(out.read_text().splitlines()[1])["spans"]


def test_tag_reads_stdin(runner):
    corpus = (FIXTURES / "munich.conll").read_text()
    prompt = "I will visit Munich next week Munich is a [MASK]."
    assert prompt == MUNICH_PROMPT
    result = invoke(
        runner, "tag", "--config", CONFIG, "--input", "-", input=corpus
    )
    assert result.exit_code == 0
    assert json.loads(result.stdout.splitlines()[1])["id"] == "stdin:1"


def test_tag_missing_config_file_is_usage_error(runner):
    result = runner.invoke(main, ["tag", "--config", "absent.yaml", "--input", CORPUS])
    assert result.exit_code == 2


def test_tag_unknown_template_exits_2(runner):
    result = invoke(
        runner, "tag", "--config", CONFIG, "--input", CORPUS, "--template", "T99"
    )
    assert result.exit_code == 2
    assert "T99" in result.stderr


def test_tag_missing_fixture_exits_2(runner):
    result = invoke(
        runner,
        "tag",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--template",
        "[TOKEN] might be a [MASK].",
    )
    assert result.exit_code == 2
    assert "no fixture" in result.stderr.lower()


def test_tag_unreachable_backend_exits_3(runner, tmp_path):
    config = tmp_path / "engine.yaml"
    config.write_text(
        "backend:\n  kind: http\n  endpoint: http://127.0.0.1:1\n  retries: 0\n  backoff: 0.0\n",
        encoding="utf-8",
    )
    result = invoke(runner, "tag", "--config", str(config), "--input", CORPUS)
    assert result.exit_code == 3


def test_tag_unreachable_server_exits_3(runner):
    result = invoke(
        runner,
        "--server",
        "http://127.0.0.1:1",
        "tag",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
    )
    assert result.exit_code == 3
    assert "cannot reach server" in result.stderr


def test_tag_without_config_uses_defaults(runner, tmp_path):
    # default backend is the stub, which cannot run without a fixture table
    result = invoke(runner, "tag", "--input", CORPUS)
    assert result.exit_code == 2
    assert "requires fixtures" in result.stderr.lower()


# --- eval --------------------------------------------------------------------


def test_eval_flow(runner, tmp_path):
    preds = tmp_path / "preds.jsonl"
    invoke(runner, "tag", "--config", CONFIG, "--input", CORPUS, "--output", str(preds))
    out = tmp_path / "report.json"
    result = invoke(
        runner,
        "eval",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--predictions",
        str(preds),
        "--output",
        str(out),
    )
    assert result.exit_code == 0
    table = result.stdout
    assert table.splitlines()[0].split()[0] == "label"
    assert "micro" in table
    document = json.loads(out.read_text())
    assert document["report"]["micro"]["f1"] == 1.0
    assert document["predictions_meta"]["model"] == "stub"


def test_eval_label_filter_flag(runner, tmp_path):
    preds = tmp_path / "preds.jsonl"
    invoke(runner, "tag", "--config", CONFIG, "--input", CORPUS, "--output", str(preds))
    result = invoke(
        runner,
        "eval",
        "--input",
        CORPUS,
        "--predictions",
        str(preds),
        "--labels",
        "PER,ORG",
    )
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert [line.split()[0] for line in lines] == ["label", "PER", "ORG", "micro"]


def test_eval_missing_predictions_is_usage_error(runner):
    result = runner.invoke(
        main, ["eval", "--input", CORPUS, "--predictions", "absent.jsonl"]
    )
    assert result.exit_code == 2


# --- compare-templates ---------------------------------------------------------


def test_compare_templates_explicit_list(runner):
    result = invoke(
        runner,
        "compare-templates",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--templates",
        "T1",
    )
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].split()[0] == "template"
    assert lines[1].split()[0] == "T1"


def test_compare_templates_single_template_flag(runner):
    result = invoke(
        runner,
        "compare-templates",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--template",
        "T1",
    )
    assert result.exit_code == 0
    assert result.stdout.splitlines()[1].split()[0] == "T1"


def test_compare_templates_output_json(runner, tmp_path):
    out = tmp_path / "rows.json"
    result = invoke(
        runner,
        "compare-templates",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--templates",
        "T1",
        "--output",
        str(out),
    )
    assert result.exit_code == 0
    document = json.loads(out.read_text())
    assert document["rows"][0]["template"] == "T1"
    assert document["rows"][0]["micro"]["f1"] == 1.0


# --- tune-threshold --------------------------------------------------------------


def hybrid_config(tmp_path):
    secondary = tmp_path / "secondary.jsonl"
    secondary.write_text(
        '{"id": "munich.conll:1", "spans": [{"start": 3, "end": 4, "label": "ORG"}]}\n',
        encoding="utf-8",
    )
    fixtures = tmp_path / "table.json"
    fixtures.write_text(json.dumps({MUNICH_PROMPT: MUNICH_TOP5}), encoding="utf-8")
    config = tmp_path / "engine.yaml"
    config.write_text(
        "backend:\n"
        "  kind: stub\n"
        "  fixtures: table.json\n"
        "hybrid:\n"
        "  secondary: secondary.jsonl\n"
        "  grid: [0.2, 0.6]\n",
        encoding="utf-8",
    )
    return config


def test_tune_threshold_flow(runner, tmp_path):
    config = hybrid_config(tmp_path)
    result = invoke(runner, "tune-threshold", "--config", str(config), "--input", CORPUS)
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].split() == ["threshold", "micro_f1"]
    assert lines[1].split() == ["-inf", "1.0000"]
    assert lines[-1].startswith("chosen p_h = -inf")


def test_tune_threshold_grid_flag_overrides(runner, tmp_path):
    config = hybrid_config(tmp_path)
    out = tmp_path / "tuned.json"
    result = invoke(
        runner,
        "tune-threshold",
        "--config",
        str(config),
        "--input",
        CORPUS,
        "--grid",
        "0.9",
        "--output",
        str(out),
    )
    assert result.exit_code == 0
    document = json.loads(out.read_text())
    assert [p for p, _ in document["table"]] == ["-inf", 0.9, "+inf"]
    assert document["p_h"] == "-inf"


def test_tune_threshold_without_secondary_exits_2(runner):
    result = invoke(
        runner,
        "tune-threshold",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--grid",
        "0.5",
    )
    assert result.exit_code == 2
    assert "secondary" in result.stderr


# --- tag with hybrid arbitration ---------------------------------------------------


def test_tag_hybrid_threshold_flag(runner, tmp_path):
    config = hybrid_config(tmp_path)
    result = invoke(
        runner,
        "tag",
        "--config",
        str(config),
        "--input",
        CORPUS,
        "--p-h",
        "0.5",
    )
    assert result.exit_code == 0
    record = json.loads(result.stdout.splitlines()[1])
    assert [(s["label"], s["source"]) for s in record["spans"]] == [("ORG", "secondary")]


def test_tag_hybrid_neg_inf_keeps_base(runner, tmp_path):
    config = hybrid_config(tmp_path)
    result = invoke(
        runner,
        "tag",
        "--config",
        str(config),
        "--input",
        CORPUS,
        "--p-h",
        "-inf",
    )
    assert result.exit_code == 0
    record = json.loads(result.stdout.splitlines()[1])
    assert [(s["label"], s["source"]) for s in record["spans"]] == [("LOC", "base")]


# --- sample / relabel / derive-lexicon -----------------------------------------------


THREE_SENTENCES = "Munich PROPN B-LOC\n\nBerlin PROPN B-LOC\n\nfin NOUN O\n"


def test_sample_deterministic(runner, tmp_path):
    corpus = tmp_path / "three.conll"
    corpus.write_text(THREE_SENTENCES, encoding="utf-8")
    args = ("sample", "--input", str(corpus), "--k", "2", "--seed", "3")
    first = invoke(runner, *args)
    second = invoke(runner, *args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    assert first.stdout.strip().count("\n\n") == 1


def test_sample_oversized_k_warns(runner, tmp_path):
    corpus = tmp_path / "three.conll"
    corpus.write_text(THREE_SENTENCES, encoding="utf-8")
    result = invoke(runner, "sample", "--input", str(corpus), "--k", "9")
    assert result.exit_code == 0
    assert "warning" in result.stderr.lower()
    assert result.stdout.strip().count("\n\n") == 2


def test_relabel_builtin_group(runner):
    result = invoke(runner, "relabel", "--input", CORPUS, "--group", "C")
    assert result.exit_code == 0
    assert "Munich PROPN O" in result.stdout
    assert "B-LOC" not in result.stdout


def test_relabel_disjoint_group_exits_2(runner):
    result = invoke(runner, "relabel", "--input", CORPUS, "--group", "A")
    assert result.exit_code == 2
    assert "shares no labels" in result.stderr


def test_derive_lexicon_flow(runner):
    result = invoke(
        runner,
        "derive-lexicon",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--mode",
        "sentences",
        "--k",
        "1",
    )
    assert result.exit_code == 0
    lexicon = json.loads(result.stdout)
    assert lexicon == {"LOC": ["city", "success", "democracy", "capital", "dream"]}
    assert "# sampled 1 sentences" in result.stderr


def test_derive_lexicon_top_m(runner):
    result = invoke(
        runner,
        "derive-lexicon",
        "--config",
        CONFIG,
        "--input",
        CORPUS,
        "--mode",
        "sentences",
        "--k",
        "1",
        "--top-m",
        "2",
    )
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"LOC": ["city", "success"]}


# --- misc ---------------------------------------------------------------------------


def test_help_lists_commands(runner):
    result = invoke(runner, "--help")
    assert result.exit_code == 0
    for command in (
        "tag",
        "eval",
        "compare-templates",
        "tune-threshold",
        "derive-lexicon",
        "sample",
        "relabel",
        "serve",
    ):
        assert command in result.stdout


def test_reproducibility_meta_stable_across_runs(runner):
    first = invoke(runner, "tag", "--config", CONFIG, "--input", CORPUS)
    second = invoke(runner, "tag", "--config", CONFIG, "--input", CORPUS)
    assert first.stdout == second.stdout
    assert first.stderr == second.stderr
