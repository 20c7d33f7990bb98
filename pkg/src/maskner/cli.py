"""Command-line client for the tagging service.

Commands run against an in-process application by default; --server targets a
running instance instead. Either way the request is the same self-contained
JSON document: file-valued config entries are inlined before sending.
"""

from __future__ import annotations

import functools
import json
import sys
import warnings
from pathlib import Path

import click
import httpx

from .config import config_from_mapping, load_config
from .errors import (
    BackendUnavailableError,
    ConfigError,
    EngineError,
    LexiconError,
    ParseError,
    TemplateError,
)
from .templates import MASK_PLACEHOLDER, TOKEN_PLACEHOLDER

EXIT_CONFIG = 2
EXIT_BACKEND = 3


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ParseError, LexiconError, TemplateError, ValueError) as exc:
            _fail(str(exc), EXIT_CONFIG)
        except BackendUnavailableError as exc:
            _fail(str(exc), EXIT_BACKEND)
        except EngineError as exc:
            _fail(str(exc), 1)
        except OSError as exc:
            _fail(str(exc), 1)

    return wrapper


@click.group()
@click.option("--server", default=None, metavar="URL", help="Send requests to a running service instead of in-process.")
@click.pass_context
def main(ctx, server):
    """Label entity candidates by asking a language model to fill a cloze prompt."""
    ctx.obj = {"server": server}


def _client(ctx):
    server = ctx.obj.get("server") if ctx.obj else None
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=120.0)
    # The in-process client is an implementation detail; its deprecation
    # chatter is not actionable for CLI users.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

        from .service.app import create_app

        return TestClient(create_app())


def _post(ctx, path: str, payload: dict) -> dict:
    client = _client(ctx)
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        _fail(f"cannot reach server: {exc}", EXIT_BACKEND)
    if response.status_code in (400, 422):
        _fail(_detail(response), EXIT_CONFIG)
    if response.status_code == 502:
        _fail(_detail(response), EXIT_BACKEND)
    if response.status_code != 200:
        _fail(f"server returned {response.status_code}: {response.text}", 1)
    return response.json()


def _detail(response) -> str:
    try:
        body = response.json()
    except ValueError:
        return response.text
    detail = body.get("detail", body)
    if isinstance(detail, str):
        return detail
    return json.dumps(detail)


def _config_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Config document (YAML or JSON)."),
        click.option("--template", default=None, help="Template id or inline pattern with [TOKEN] and [MASK]."),
        click.option("--backend", "backend_spec", default=None, metavar="stub|URL", help="Probability source: 'stub' or a service base URL."),
        click.option("--seed", type=int, default=None),
        click.option("--jobs", type=int, default=None, help="Worker threads for per-sentence tagging."),
        click.option("--p-h", "p_h", default=None, metavar="FLOAT|-inf|+inf", help="Arbitration threshold."),
        click.option("--grid", default=None, metavar="F1,F2,...", help="Candidate thresholds for tuning."),
        click.option("--labels", default=None, metavar="L1,L2,...", help="Evaluate these labels only."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _io_options(fn):
    fn = click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout.")(fn)
    fn = click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False, allow_dash=True), help="Corpus file ('-' for stdin).")(fn)
    return fn


def _build_config(config_path, template, backend_spec, seed, jobs, p_h, grid, labels):
    if config_path:
        base_dir = Path(config_path).resolve().parent
        mapping = load_config(config_path).model_dump()
    else:
        base_dir = Path.cwd()
        mapping = {}
    if template is not None:
        if TOKEN_PLACEHOLDER in template or MASK_PLACEHOLDER in template:
            mapping["template"] = {"id": "custom", "pattern": template}
        else:
            mapping["template"] = template
    if backend_spec is not None:
        backend = dict(mapping.get("backend") or {})
        if backend_spec == "stub":
            backend["kind"] = "stub"
            backend.pop("endpoint", None)
        else:
            backend["kind"] = "http"
            backend["endpoint"] = backend_spec
        mapping["backend"] = backend
    if seed is not None:
        mapping["seed"] = seed
    if jobs is not None:
        mapping["jobs"] = jobs
    if p_h is not None:
        hybrid = dict(mapping.get("hybrid") or {})
        hybrid["p_h"] = p_h
        mapping["hybrid"] = hybrid
    if grid is not None:
        hybrid = dict(mapping.get("hybrid") or {})
        hybrid["grid"] = [part.strip() for part in grid.split(",") if part.strip()]
        mapping["hybrid"] = hybrid
    if labels is not None:
        mapping["eval"] = {"label_filter": [part.strip() for part in labels.split(",") if part.strip()]}
    return config_from_mapping(mapping).inline_paths(base_dir)


def _read_input(input_path: str) -> tuple[str, str]:
    if input_path == "-":
        return sys.stdin.read(), "stdin"
    return Path(input_path).read_text(encoding="utf-8"), Path(input_path).name


def _emit_meta(meta):
    if meta:
        click.echo(
            f"# config_hash={meta.get('config_hash')} model={meta.get('model')} seed={meta.get('seed')}",
            err=True,
        )


def _emit_warnings(warnings_list):
    for message in warnings_list or []:
        click.echo(f"warning: {message}", err=True)


def _write_text(output, text: str):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _write_json(output, document: dict):
    text = json.dumps(document, ensure_ascii=False, indent=2) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@_io_options
@_config_options
@click.option("--format", "fmt", type=click.Choice(["jsonlines", "conll"]), default="jsonlines")
@click.pass_context
@_guard
def tag(ctx, input_path, output, fmt, **config_flags):
    """Label a corpus; writes predictions (jsonlines or BIO columns)."""
    config = _build_config(**config_flags)
    corpus, source = _read_input(input_path)
    payload = {
        "config": config.model_dump(mode="json"),
        "corpus": corpus,
        "source": source,
        "format": fmt,
    }
    data = _post(ctx, "/v1/tag", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    _write_text(output, data["output"])


@main.command("eval")
@_io_options
@_config_options
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Predictions file (jsonlines) to score.")
@click.pass_context
@_guard
def eval_cmd(ctx, input_path, output, predictions_path, **config_flags):
    """Score predictions against gold spans; table to stdout, JSON to --output."""
    config = _build_config(**config_flags)
    corpus, source = _read_input(input_path)
    payload = {
        "config": config.model_dump(mode="json"),
        "corpus": corpus,
        "source": source,
        "predictions": Path(predictions_path).read_text(encoding="utf-8"),
    }
    data = _post(ctx, "/v1/eval", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    click.echo(data["rendered"])
    if output:
        _write_json(output, {
            "report": data["report"],
            "meta": data.get("meta"),
            "predictions_meta": data.get("predictions_meta"),
        })


@main.command("compare-templates")
@_io_options
@_config_options
@click.option("--templates", "templates_csv", default=None, metavar="T1,T2,...", help="Template ids to compare (default: config list, else all builtin).")
@click.pass_context
@_guard
def compare_templates_cmd(ctx, input_path, output, templates_csv, **config_flags):
    """Score every configured template over one corpus."""
    config = _build_config(**config_flags)
    if templates_csv:
        ids = [part.strip() for part in templates_csv.split(",") if part.strip()]
        config = config.model_copy(update={"templates": ids})
    elif config_flags.get("template") and config.templates is None:
        config = config.model_copy(update={"templates": [config.template]})
    corpus, source = _read_input(input_path)
    payload = {"config": config.model_dump(mode="json"), "corpus": corpus, "source": source}
    data = _post(ctx, "/v1/compare-templates", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    click.echo(data["rendered"])
    if output:
        _write_json(output, {"rows": data["rows"], "meta": data.get("meta")})


@main.command("tune-threshold")
@_io_options
@_config_options
@click.pass_context
@_guard
def tune_threshold_cmd(ctx, input_path, output, **config_flags):
    """Pick the arbitration threshold maximizing micro-F1 on a dev corpus."""
    config = _build_config(**config_flags)
    corpus, source = _read_input(input_path)
    payload = {"config": config.model_dump(mode="json"), "corpus": corpus, "source": source}
    data = _post(ctx, "/v1/tune-threshold", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    width = max(len(str(p)) for p, _ in data["table"])
    click.echo(f"{'threshold'.ljust(max(width, 9))}  micro_f1")
    for p, f1 in data["table"]:
        click.echo(f"{str(p).ljust(max(width, 9))}  {f1:.4f}")
    click.echo(f"chosen p_h = {data['p_h']} (micro F1 {data['f1']:.4f})")
    if output:
        _write_json(output, {
            "p_h": data["p_h"],
            "f1": data["f1"],
            "table": data["table"],
            "meta": data.get("meta"),
        })


@main.command("derive-lexicon")
@_io_options
@_config_options
@click.option("--mode", type=click.Choice(["per_label_mentions", "sentences"]), default="per_label_mentions")
@click.option("--k", type=int, required=True, help="Mentions per label (or sentences) to sample.")
@click.option("--top-m", type=int, default=8, help="Words kept per label.")
@click.pass_context
@_guard
def derive_lexicon_cmd(ctx, input_path, output, mode, k, top_m, **config_flags):
    """Derive representative words from few-shot samples; writes a lexicon file."""
    config = _build_config(**config_flags)
    corpus, source = _read_input(input_path)
    payload = {
        "config": config.model_dump(mode="json"),
        "corpus": corpus,
        "source": source,
        "mode": mode,
        "k": k,
        "top_m": top_m,
    }
    data = _post(ctx, "/v1/derive-lexicon", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    click.echo(f"# sampled {len(data['sample_ids'])} sentences", err=True)
    _write_json(output, data["lexicon"])


@main.command()
@_io_options
@_config_options
@click.option("--mode", type=click.Choice(["per_label_mentions", "sentences"]), default="sentences")
@click.option("--k", type=int, required=True)
@click.pass_context
@_guard
def sample(ctx, input_path, output, mode, k, **config_flags):
    """Draw a seeded few-shot sample; writes the subset in corpus format."""
    config = _build_config(**config_flags)
    corpus, source = _read_input(input_path)
    payload = {
        "config": config.model_dump(mode="json"),
        "corpus": corpus,
        "source": source,
        "mode": mode,
        "k": k,
    }
    data = _post(ctx, "/v1/sample", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    _write_text(output, data["output"])


@main.command()
@_io_options
@_config_options
@click.option("--group", required=True, help="Builtin group name (A, B, C) or comma-separated labels.")
@click.pass_context
@_guard
def relabel(ctx, input_path, output, group, **config_flags):
    """Delete a label group's gold spans (O-tagging) for adaptation experiments."""
    config = _build_config(**config_flags)
    corpus, source = _read_input(input_path)
    payload = {
        "config": config.model_dump(mode="json"),
        "corpus": corpus,
        "source": source,
        "group": group,
    }
    data = _post(ctx, "/v1/relabel", payload)
    _emit_meta(data.get("meta"))
    _emit_warnings(data.get("warnings"))
    _write_text(output, data["output"])


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8400)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
