"""Report files and the cross-model comparison table.

Machine-readable outputs keep full float precision; the Markdown/CSV tables
round for display only (two decimals, sparsity as a percentage), mark each
property with its improvement direction, and bold the best value per row.
"""

from __future__ import annotations

import csv
import datetime
import io
from pathlib import Path
from typing import Mapping, Sequence

from .dumpio import ConsistencyError, dumps_canonical, _check_format, _load_json
from .metrics import (
    AggregateProperty,
    EvaluationReport,
    LocalizationScore,
    PropertyScores,
    RunConfig,
    VARIANTS,
    aggregate_flat,
    flatten_scores,
)
from .records import COMBINED_LEVEL

REPORT_FORMAT = "pefcoh-report/1"
AGGREGATE_FORMAT = "pefcoh-aggregate/1"
COMPARISON_FORMAT = "pefcoh-comparison/1"

FIXED_TIMESTAMP = "1970-01-01T00:00:00Z"

UP = "↑"
DOWN = "↓"
ABSENT = "—"  # em dash cell for properties a run could not compute


def timestamp(fixed: bool) -> str:
    if fixed:
        return FIXED_TIMESTAMP
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# JSON shapes


def scores_to_dict(scores: PropertyScores) -> dict:
    return {
        "total_prototypes": scores.total_prototypes,
        "global_prototypes": scores.global_prototypes,
        "sparsity_ratio": scores.sparsity_ratio,
        "local_positive": scores.local_positive,
        "local_negative": scores.local_negative,
        "relevance": scores.relevance,
        "relevant_prototypes": scores.relevant_prototypes,
        "specialization": dict(scores.specialization),
        "uniqueness": scores.uniqueness,
        "unique_categories": scores.unique_categories,
        "coverage": scores.coverage,
        "total_categories": scores.total_categories,
        "class_specific": scores.class_specific,
        "class_specific_eligible": scores.class_specific_eligible,
        "localization": {
            variant: {"iou": s.iou, "dsc": s.dsc}
            for variant, s in scores.localization.items()
        },
    }


def scores_from_dict(raw: Mapping) -> PropertyScores:
    return PropertyScores(
        total_prototypes=raw["total_prototypes"],
        global_prototypes=raw["global_prototypes"],
        sparsity_ratio=raw["sparsity_ratio"],
        local_positive=raw["local_positive"],
        local_negative=raw["local_negative"],
        relevance=raw["relevance"],
        relevant_prototypes=raw["relevant_prototypes"],
        specialization=dict(raw["specialization"]),
        uniqueness=raw["uniqueness"],
        unique_categories=raw["unique_categories"],
        coverage=raw["coverage"],
        total_categories=raw["total_categories"],
        class_specific=raw["class_specific"],
        class_specific_eligible=raw["class_specific_eligible"],
        localization={
            variant: LocalizationScore(entry["iou"], entry["dsc"])
            for variant, entry in raw["localization"].items()
        },
    )


def config_from_dict(raw: Mapping) -> RunConfig:
    return RunConfig(
        k=raw["k"],
        patch_size=raw["patch_size"],
        eps=raw["eps"],
        levels=tuple(raw["levels"]) if raw["levels"] is not None else None,
        class_specific_level=raw["class_specific_level"],
        tc_override=raw["tc_override"],
        tc_split=raw["tc_split"],
        lp_weight_class=raw["lp_weight_class"],
    )


def report_to_dict(report: EvaluationReport, fixed_timestamp: bool = False) -> dict:
    verdicts = []
    for v in report.verdicts:
        entry: dict = {
            "prototype_id": v.prototype_id,
            "is_global": v.is_global,
            "is_relevant": v.is_relevant,
            "purity_per_level": {
                level: {
                    "category": cat.value if cat is not None else None,
                    "purity": float(purity),
                }
                for level, (cat, purity) in v.purity_per_level.items()
            },
            "combined_category": (
                v.combined_category.value if v.combined_category is not None else None
            ),
            "align": v.align,
        }
        if v.evidence is not None:
            entry["evidence"] = {
                "shortfall": v.evidence.shortfall,
                "items": [
                    {
                        "image_id": item.image_id,
                        "score": item.score,
                        "patch": list(item.patch.as_floats()),
                        "roi_index": item.roi_index,
                        "combined_category": (
                            item.categories[COMBINED_LEVEL].value
                            if item.categories is not None
                            else None
                        ),
                    }
                    for item in v.evidence.items
                ],
            }
        verdicts.append(entry)
    return {
        "format": REPORT_FORMAT,
        "generated_at": timestamp(fixed_timestamp),
        "model_name": report.model_name,
        "seed": report.seed,
        "config": report.config.to_dict(),
        "warnings": list(report.warnings),
        "scores": scores_to_dict(report.scores),
        "prototypes": verdicts,
        "localization_rows": [
            {
                "image_id": row.image_id,
                "n_candidates": row.n_candidates,
                **{
                    variant: {"iou": s.iou, "dsc": s.dsc}
                    for variant, s in row.per_variant.items()
                },
            }
            for row in report.localization_rows
        ],
    }


def write_report(path: str | Path, report: EvaluationReport, fixed_timestamp: bool = False) -> None:
    Path(path).write_text(
        dumps_canonical(report_to_dict(report, fixed_timestamp)), encoding="utf-8"
    )


def load_report(path: str | Path) -> dict:
    """Load a report file; returns the raw dict after a format check."""
    return _check_format(_load_json(path), REPORT_FORMAT, path)


def properties_to_dict(
    properties: Mapping[str, AggregateProperty | None]
) -> dict:
    return {
        key: (
            None if prop is None else {"mean": prop.mean, "std": prop.std, "n": prop.n}
        )
        for key, prop in properties.items()
    }


def aggregate_to_dict(
    reports: Sequence[EvaluationReport],
    properties: Mapping[str, AggregateProperty | None],
    fixed_timestamp: bool = False,
) -> dict:
    return {
        "format": AGGREGATE_FORMAT,
        "generated_at": timestamp(fixed_timestamp),
        "models": [r.model_name for r in reports],
        "seeds": [r.seed for r in reports],
        "n_runs": len(reports),
        "config": reports[0].config.to_dict(),
        "properties": properties_to_dict(properties),
    }


# ---------------------------------------------------------------------------
# comparison table


def comparison_rows(levels: Sequence[str]) -> list[tuple[str, str, str, str]]:
    """(flat key, row label, direction, format kind) in fixed display order.

    Specialization appears per level except the combined level, which the
    uniqueness/coverage rows already summarize.
    """
    rows = [
        ("global_prototypes", "Compactness: global", DOWN, "count"),
        ("local_positive", "Compactness: local positive", DOWN, "count"),
        ("local_negative", "Compactness: local negative", DOWN, "count"),
        ("sparsity_ratio", "Compactness: sparsity", UP, "percent"),
        ("relevance", "Relevance", UP, "score"),
    ]
    for level in levels:
        if level == COMBINED_LEVEL:
            continue
        rows.append((f"specialization.{level}", f"Specialization: {level}", UP, "score"))
    rows += [
        ("uniqueness", "Uniqueness", UP, "score"),
        ("coverage", "Coverage", UP, "score"),
        ("class_specific", "Class-specific", UP, "score"),
    ]
    for variant in VARIANTS:
        rows.append(
            (f"localization.{variant}.iou", f"Localization: IoU {variant}", UP, "score")
        )
    for variant in VARIANTS:
        rows.append(
            (f"localization.{variant}.dsc", f"Localization: DSC {variant}", UP, "score")
        )
    return rows


def _format_cell(prop: AggregateProperty | None, kind: str) -> str:
    if prop is None:
        return ABSENT
    if kind == "percent":
        text = f"{100 * prop.mean:.2f}%"
        if prop.std is not None:
            text += f" ± {100 * prop.std:.2f}%"
        return text
    text = f"{prop.mean:.2f}"
    if prop.std is not None:
        text += f" ± {prop.std:.2f}"
    return text


def build_comparison(
    model_reports: Mapping[str, Sequence[dict]],
) -> tuple[dict, list[list[str]]]:
    """From per-model lists of loaded report dicts, build the comparison JSON
    payload and the display table (header row first).

    All reports must share the same config; the first model's level list
    fixes the row set.
    """
    if not model_reports:
        raise ValueError("no reports to compare")
    configs = []
    for reports in model_reports.values():
        configs.extend(r["config"] for r in reports)
    first = configs[0]
    for other in configs[1:]:
        if other != first:
            mismatched = sorted(
                key for key in first if other.get(key) != first.get(key)
            )
            raise ConsistencyError(
                f"reports disagree on config fields: {', '.join(mismatched)}"
            )

    per_model: dict[str, dict[str, AggregateProperty | None]] = {}
    for model, reports in model_reports.items():
        per_model[model] = aggregate_flat([_flatten_report(r) for r in reports])

    levels = first["levels"]
    if levels is None:
        some_report = next(iter(model_reports.values()))[0]
        levels = list(some_report["scores"]["specialization"])
    rows = comparison_rows(levels)

    models = list(model_reports)
    table = [["Property"] + models]
    for key, label, direction, kind in rows:
        cells = [f"{label} {direction}"]
        values = {m: per_model[m].get(key) for m in models}
        present = {m: v.mean for m, v in values.items() if v is not None}
        best: set[str] = set()
        if len(models) > 1 and present:
            target = min(present.values()) if direction == DOWN else max(present.values())
            best = {m for m, v in present.items() if v == target}
        for model in models:
            cell = _format_cell(values[model], kind)
            if model in best and cell != ABSENT:
                cell = f"**{cell}**"
            cells.append(cell)
        table.append(cells)

    payload = {
        "format": COMPARISON_FORMAT,
        "config": first,
        "models": {
            model: {
                "n_runs": len(model_reports[model]),
                "properties": properties_to_dict(per_model[model]),
            }
            for model in models
        },
    }
    return payload, table


def _flatten_report(raw: dict) -> dict:
    return flatten_scores(scores_from_dict(raw["scores"]))


def render_markdown(table: list[list[str]], config: Mapping) -> str:
    out = ["# Prototype evaluation comparison", ""]
    out.append("| " + " | ".join(table[0]) + " |")
    out.append("| " + " | ".join("---" for _ in table[0]) + " |")
    for row in table[1:]:
        out.append("| " + " | ".join(row) + " |")
    out.append("")
    config_text = ", ".join(f"{key}={value}" for key, value in config.items())
    out.append(f"Config: {config_text}. Values are mean ± sample std across runs; "
               f"best per row in bold ({UP} higher is better, {DOWN} lower is better).")
    out.append("")
    return "\n".join(out)


def render_csv(table: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in table:
        writer.writerow(row)
    return buffer.getvalue()
