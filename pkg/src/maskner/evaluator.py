"""Exact-boundary span scoring and the multi-template comparison harness."""

from __future__ import annotations

from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

from .backend import MaskBackend
from .corpus import Dataset
from .detector import DetectorConfig
from .errors import TemplateError
from .labeler import Prediction, tag_dataset
from .lexicon import LabelLexicon
from .templates import Template, builtin_catalog


@dataclass
class EvalReport:
    per_label: dict[str, dict[str, float]]
    micro: dict[str, float]
    counts: dict[str, int]

    def as_dict(self) -> dict:
        return {"per_label": self.per_label, "micro": self.micro, "counts": self.counts}


def _prf(tp: int, fp: int, fn: int) -> dict[str, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def span_f1(
    gold: Dataset,
    predictions: Mapping[str, Sequence[Prediction]],
    label_filter: Sequence[str] | None = None,
) -> EvalReport:
    """Micro-averaged exact-match span scores.

    A prediction is a true positive iff a gold span with the same start, end,
    and label exists (each gold span matches at most one prediction). With a
    label filter, spans of other labels are removed from both sides first, and
    the micro average runs over the filtered label set only.
    """
    known = {sentence.id for sentence in gold.sentences}
    for sid in predictions:
        if sid not in known:
            raise ValueError(f"predictions name unknown sentence {sid!r}")

    allowed = set(label_filter) if label_filter is not None else None
    order: list[str] = list(dict.fromkeys(label_filter)) if label_filter is not None else list(gold.label_set)
    seen = set(order)
    tp: dict[str, int] = defaultdict(int)
    fp: dict[str, int] = defaultdict(int)
    fn: dict[str, int] = defaultdict(int)
    gold_total = 0
    pred_total = 0

    for sentence in gold.sentences:
        gold_keys = Counter(
            (s.start, s.end, s.label)
            for s in sentence.gold
            if allowed is None or s.label in allowed
        )
        pred_keys = [
            (p.span.start, p.span.end, p.label)
            for p in predictions.get(sentence.id, ())
            if allowed is None or p.label in allowed
        ]
        gold_total += sum(gold_keys.values())
        pred_total += len(pred_keys)
        matched: Counter = Counter()
        for key in pred_keys:
            label = key[2]
            if label not in seen:
                order.append(label)
                seen.add(label)
            if matched[key] < gold_keys[key]:
                matched[key] += 1
                tp[label] += 1
            else:
                fp[label] += 1
        for key, count in gold_keys.items():
            fn[key[2]] += count - matched[key]

    per_label = {label: _prf(tp[label], fp[label], fn[label]) for label in order}
    micro = _prf(sum(tp[l] for l in order), sum(fp[l] for l in order), sum(fn[l] for l in order))
    counts = {
        "sentences": len(gold.sentences),
        "gold_spans": gold_total,
        "predicted_spans": pred_total,
    }
    return EvalReport(per_label, micro, counts)


@dataclass
class TemplateRow:
    template_id: str
    report: EvalReport

    def as_dict(self) -> dict:
        return {"template": self.template_id, **self.report.as_dict()}


def compare_templates(
    dataset: Dataset,
    templates: Sequence[str | Template],
    backend: MaskBackend,
    lexicon: LabelLexicon,
    detector_config: DetectorConfig | None = None,
    aggregation: str = "max",
    abstain_below: float = 0.0,
    label_filter: Sequence[str] | None = None,
    catalog: Mapping[str, Template] | None = None,
    jobs: int = 1,
) -> list[TemplateRow]:
    """Tag the dataset once per template and score each run.

    Template ids resolve against the built-in catalog (or a caller-supplied
    one) before any backend traffic, so an unknown id fails fast.
    """
    if not templates:
        raise ValueError("no templates to compare")
    catalog = catalog if catalog is not None else builtin_catalog()
    resolved: list[Template] = []
    for entry in templates:
        if isinstance(entry, Template):
            resolved.append(entry)
        elif entry in catalog:
            resolved.append(catalog[entry])
        else:
            raise TemplateError(f"unknown template id {entry!r}")

    def run(template: Template) -> TemplateRow:
        tagged = tag_dataset(
            dataset, template, backend, lexicon, detector_config, aggregation, abstain_below
        )
        return TemplateRow(template.id, span_f1(dataset, tagged, label_filter))

    if jobs > 1 and len(resolved) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, resolved))
    return [run(template) for template in resolved]


def render_report(report: EvalReport) -> str:
    """Aligned plain-text scoreboard, one row per label plus the micro row."""
    headers = ("label", "tp", "fp", "fn", "precision", "recall", "f1")
    rows = []
    for label, cell in report.per_label.items():
        rows.append((label, *_format_cells(cell)))
    rows.append(("micro", *_format_cells(report.micro)))
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def _format_cells(cell: Mapping[str, float]) -> tuple[str, ...]:
    return (
        str(int(cell["tp"])),
        str(int(cell["fp"])),
        str(int(cell["fn"])),
        f"{cell['precision']:.4f}",
        f"{cell['recall']:.4f}",
        f"{cell['f1']:.4f}",
    )


def render_comparison(rows: Sequence[TemplateRow]) -> str:
    """Aligned template-by-label F1 matrix with a trailing micro column."""
    labels: list[str] = []
    for row in rows:
        for label in row.report.per_label:
            if label not in labels:
                labels.append(label)
    headers = ["template", *labels, "micro"]
    body = []
    for row in rows:
        cells = [row.template_id]
        for label in labels:
            cell = row.report.per_label.get(label)
            cells.append(f"{cell['f1']:.4f}" if cell else "-")
        cells.append(f"{row.report.micro['f1']:.4f}")
        body.append(cells)
    widths = [max(len(headers[i]), *(len(r[i]) for r in body)) for i in range(len(headers))]
    lines = ["  ".join(headers[i].ljust(widths[i]) for i in range(len(headers)))]
    for cells in body:
        lines.append("  ".join(cells[i].ljust(widths[i]) for i in range(len(cells))))
    return "\n".join(lines)
