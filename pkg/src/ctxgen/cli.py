"""Command-line entry points: ``ctxgen run``, ``ctxgen eval``, ``ctxgen prep``.

Configuration precedence: JSON config file, then CLI flags, then CTXGEN_*
environment variables. All outputs are UTF-8 JSON; the eval report also
writes a CSV table and renders figures next to it.
"""

from __future__ import annotations

import json
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from ctxgen.config import PipelineConfig, ResourceConfig, load_config_file
from ctxgen.context_gen import (
    ExtractiveFallbackBackend,
    HttpSummarizerBackend,
    PipelineResources,
    run_pipeline,
)
from ctxgen.dataset_prep import (
    image_record_to_dict,
    keep_reasons,
    parse_image_record,
    prepped_record,
)
from ctxgen.eval_harness import (
    ablate_sentences,
    corpus_metrics,
    language_stats,
    make_concat_baseline,
    make_concat_filter_baseline,
)
from ctxgen.image_analyzer import parse_bundle
from ctxgen.report import render_metrics_figure, render_stats_figure, write_metrics_csv
from ctxgen.resources import MissingResourceError, load_graph, load_lexicon, load_resources
from ctxgen.text_core import normalize_and_tokenize

_METHOD_RE = re.compile(r"^concat_filter_(\d{1,2})$")


def _write_json(path: str | Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _assemble_configs(config_path, flag_overrides: dict, resource_flags: dict):
    if config_path:
        config, res_cfg = load_config_file(config_path)
    else:
        config, res_cfg = PipelineConfig(), ResourceConfig()
    config = config.with_overrides(flag_overrides)
    for name, value in resource_flags.items():
        if value is not None:
            setattr(res_cfg, name, value)
    return config.with_env_overrides(), res_cfg.with_env_overrides()


def _backend_from_spec(spec: str, store):
    if spec == "fallback":
        return ExtractiveFallbackBackend(store)
    if spec.startswith("http:"):
        rest = spec[len("http:"):]
        url = spec if rest.startswith("//") else rest
        return HttpSummarizerBackend(url)
    raise click.BadParameter(f"backend must be 'fallback' or 'http:URL', got {spec!r}")


def _parse_beam_widths(_ctx, _param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


_THRESHOLD_OPTIONS = [
    click.option("--t-text-sim", type=float, default=None, help="caption dedup cosine threshold"),
    click.option("--t-model-confidence", type=float, default=None, help="classifier confidence gate"),
    click.option("--alpha", type=float, default=None, help="summary relevance threshold"),
    click.option("--beta", type=float, default=None, help="summary dedup threshold"),
    click.option("--min-person-prob", type=float, default=None, help="person detection gate"),
    click.option("--person-area-ratio", type=float, default=None, help="dataset-prep area fraction"),
    click.option("--beam-widths", callback=_parse_beam_widths, default=None,
                 help="comma-separated beam widths"),
]

_RESOURCE_OPTIONS = [
    click.option("--embeddings", "embeddings_path", type=click.Path(), default=None),
    click.option("--lexicon", "lexicon_path", type=click.Path(), default=None),
    click.option("--wordnet-data", "wordnet_data_path", type=click.Path(), default=None),
    click.option("--wordnet-index", "wordnet_index_path", type=click.Path(), default=None),
    click.option("--wordnet-tsv", "wordnet_tsv_path", type=click.Path(), default=None),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _split_flags(kwargs: dict) -> tuple[dict, dict]:
    threshold_keys = (
        "t_text_sim", "t_model_confidence", "alpha", "beta",
        "min_person_prob", "person_area_ratio", "beam_widths",
    )
    resource_keys = (
        "embeddings_path", "lexicon_path", "wordnet_data_path",
        "wordnet_index_path", "wordnet_tsv_path",
    )
    return (
        {k: kwargs.pop(k) for k in threshold_keys},
        {k: kwargs.pop(k) for k in resource_keys},
    )


@click.group()
@click.version_option(package_name="ctxgen")
def main():
    """Generate and evaluate person-focused image context paragraphs."""


# ---------------------------------------------------------------------------
# run


def _process_bundle(path: Path, resources, config, method: str, seed: int, want_timing: bool) -> dict:
    started = time.perf_counter()
    row = {
        "image_id": path.stem,
        "status": "error",
        "paragraph": "",
        "chosen_variant": None,
        "chosen_noun": None,
        "stage_counts": {},
        "timings": None,
    }
    try:
        with open(path, encoding="utf-8") as fh:
            bundle = parse_bundle(json.load(fh))
        row["image_id"] = bundle.image_id
        if method == "ours":
            result = run_pipeline(bundle, resources, config)
            row.update(
                status=result.status,
                paragraph=result.paragraph,
                chosen_variant=result.chosen_variant,
                chosen_noun=result.chosen_noun,
                stage_counts=result.stage_counts,
            )
        else:
            captions = list(bundle.captions)
            if method == "concat":
                paragraph = make_concat_baseline(captions)
            else:
                paragraph = make_concat_filter_baseline(captions, resources, config)
                match = _METHOD_RE.match(method)
                if match and paragraph:
                    paragraph = ablate_sentences(paragraph, int(match.group(1)) / 100.0, seed)
            row.update(status="ok", paragraph=paragraph)
    except Exception as exc:  # one bad image must not kill the batch
        row["error"] = f"{type(exc).__name__}: {exc}"
    if want_timing:
        row["timings"] = {"total_ms": round((time.perf_counter() - started) * 1000.0, 3)}
    return row


@main.command("run")
@click.option("--input", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False), help="directory of per-image JSON bundles")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", "backend_spec", default="fallback", show_default=True,
              help="'fallback' or 'http:URL'")
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--jobs", default=1, show_default=True, help="worker threads")
@click.option("--method", default="ours", show_default=True,
              help="ours | concat | concat_filter | concat_filter_NN")
@click.option("--seed", default=0, show_default=True, help="sentence-ablation seed")
@click.option("--timings", "want_timing", is_flag=True,
              help="record wall-clock timings per row (breaks re-run byte identity)")
@_add_options(_THRESHOLD_OPTIONS)
@_add_options(_RESOURCE_OPTIONS)
def cmd_run(input_dir, config_path, backend_spec, output_path, jobs, method, seed, want_timing, **kwargs):
    """Run the pipeline (or a baseline) over a directory of image bundles."""
    if method != "ours" and method not in ("concat", "concat_filter") and not _METHOD_RE.match(method):
        _fail(f"unknown method {method!r}", 2)
    threshold_flags, resource_flags = _split_flags(kwargs)
    try:
        config, res_cfg = _assemble_configs(config_path, threshold_flags, resource_flags)
        resources = load_resources(res_cfg)
    except MissingResourceError as exc:
        _fail(str(exc), 2)
    except (ValueError, OSError) as exc:
        _fail(str(exc), 2)
    resources.backend = _backend_from_spec(backend_spec, resources.store)

    bundle_paths = sorted(Path(input_dir).glob("*.json"))
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(
            pool.map(
                lambda p: _process_bundle(p, resources, config, method, seed, want_timing),
                bundle_paths,
            )
        )
    rows.sort(key=lambda r: r["image_id"])
    manifest = {
        "method": method,
        "backend": resources.backend.kind,
        "config": config.to_dict(),
        "rows": rows,
    }
    _write_json(output_path, manifest)
    failures = sum(1 for r in rows if r["status"] == "error")
    if failures:
        click.echo(f"{failures}/{len(rows)} images failed", err=True)
        sys.exit(1)
    click.echo(f"wrote {output_path} ({len(rows)} images)")


# ---------------------------------------------------------------------------
# eval


def _load_candidate_sets(path: Path) -> dict[str, dict[str, str]]:
    """Accepts a list of rows, a {method: rows} map, or a run manifest."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "rows" in data:
        method = data.get("method", "ours")
        return {method: {str(r["image_id"]): str(r["paragraph"]) for r in data["rows"]}}
    if isinstance(data, list):
        data = {"ours": data}
    sets = {}
    for method, rows in data.items():
        sets[method] = {str(r["image_id"]): str(r["candidate"]) for r in rows}
    return sets


def _load_references(path: Path) -> dict[str, list[str]]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        return {str(k): [str(r) for r in v] for k, v in data.items()}
    return {str(r["image_id"]): [str(ref) for ref in r["references"]] for r in data}


def _load_record_directory(path: Path) -> tuple[dict[str, dict[str, str]], dict[str, list[str]]]:
    """Directory of per-image records {"image_id", "candidate", "references"}."""
    rows: dict[str, str] = {}
    references: dict[str, list[str]] = {}
    for record_path in sorted(path.glob("*.json")):
        with open(record_path, encoding="utf-8") as fh:
            record = json.load(fh)
        image_id = str(record["image_id"])
        rows[image_id] = str(record["candidate"])
        references[image_id] = [str(r) for r in record["references"]]
    return {"ours": rows}, references


@main.command("eval")
@click.option("--candidates", "candidates_path", required=True,
              type=click.Path(exists=True),
              help="candidates file, run manifest, or directory of per-image records")
@click.option("--references", "references_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="references file (not needed when --candidates is a record directory)")
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--figures", "figures_dir", type=click.Path(file_okay=False), default=None,
              help="directory for rendered figures (default: next to the report)")
@click.option("--no-figures", is_flag=True, help="skip figure rendering")
def cmd_eval(candidates_path, references_path, output_path, config_path, figures_dir, no_figures):
    """Score candidate paragraphs against references and write the report."""
    try:
        _, res_cfg = _assemble_configs(config_path, {}, {})
        graph = load_graph(res_cfg)
        lexicon = load_lexicon(res_cfg)
    except (MissingResourceError, ValueError, OSError) as exc:
        _fail(str(exc), 2)
    candidates = Path(candidates_path)
    if candidates.is_dir():
        candidate_sets, references = _load_record_directory(candidates)
        if references_path is not None:
            references = _load_references(Path(references_path))
    elif references_path is None:
        _fail("--references is required unless --candidates is a record directory", 2)
    else:
        candidate_sets = _load_candidate_sets(candidates)
        references = _load_references(Path(references_path))
    if not candidate_sets or all(not rows for rows in candidate_sets.values()):
        _fail("empty candidate set", 2)
    ref_ids = set(references)
    for method, rows in candidate_sets.items():
        mismatch = set(rows) ^ ref_ids
        if mismatch:
            _fail(f"image ids not aligned for {method!r}: {sorted(mismatch)}", 2)

    ordered_ids = sorted(ref_ids)
    tokenized_refs = [
        [[t.surface for t in normalize_and_tokenize(ref)] for ref in references[i]]
        for i in ordered_ids
    ]
    methods_out = {}
    for method, rows in candidate_sets.items():
        paragraphs = [rows[i] for i in ordered_ids]
        tokenized = [[t.surface for t in normalize_and_tokenize(p)] for p in paragraphs]
        metrics = corpus_metrics(tokenized, tokenized_refs, graph)
        stats = language_stats(paragraphs, lexicon)
        methods_out[method] = {"metrics": metrics.to_dict(), "stats": stats.to_dict()}

    all_refs = [ref for i in ordered_ids for ref in references[i]]
    reference_stats = language_stats(all_refs, lexicon).to_dict()
    _write_json(output_path, {
        "n_images": len(ordered_ids),
        "methods": methods_out,
        "reference_stats": reference_stats,
    })

    out = Path(output_path)
    write_metrics_csv(out.with_suffix(".csv"), methods_out)
    if not no_figures:
        fig_dir = Path(figures_dir) if figures_dir else out.parent
        fig_dir.mkdir(parents=True, exist_ok=True)
        render_metrics_figure(fig_dir / f"{out.stem}_metrics.png", methods_out)
        stats_with_refs = {m: e["stats"] for m, e in methods_out.items()}
        stats_with_refs["humans"] = reference_stats
        render_stats_figure(fig_dir / f"{out.stem}_stats.png", stats_with_refs)
    click.echo(f"wrote {output_path} ({len(ordered_ids)} images, {len(methods_out)} methods)")


# ---------------------------------------------------------------------------
# prep


@main.command("prep")
@click.option("--input", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--output", "output_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@_add_options(_THRESHOLD_OPTIONS)
@_add_options(_RESOURCE_OPTIONS)
def cmd_prep(input_dir, output_dir, config_path, **kwargs):
    """Filter a directory of image records down to person-relevant ones."""
    threshold_flags, resource_flags = _split_flags(kwargs)
    try:
        config, res_cfg = _assemble_configs(config_path, threshold_flags, resource_flags)
        graph = load_graph(res_cfg)
        lexicon = load_lexicon(res_cfg)
    except (MissingResourceError, ValueError, OSError) as exc:
        _fail(str(exc), 2)

    out_root = Path(output_dir)
    records_dir = out_root / "records"
    records_dir.mkdir(parents=True, exist_ok=True)

    kept, dropped, skipped, flagged = [], [], [], []
    for path in sorted(Path(input_dir).glob("*.json")):
        try:
            with open(path, encoding="utf-8") as fh:
                record = parse_image_record(json.load(fh))
        except Exception as exc:
            skipped.append({"file": path.name, "reason": f"{type(exc).__name__}: {exc}"})
            click.echo(f"skipping {path.name}: {exc}", err=True)
            continue
        reasons = keep_reasons(record, graph, lexicon, config)
        if reasons:
            dropped.append({"image_id": record.image_id, "reasons": reasons})
            continue
        cleaned = prepped_record(record, graph, lexicon)
        _write_json(records_dir / f"{cleaned.image_id}.json", image_record_to_dict(cleaned))
        kept.append(record.image_id)
        if not cleaned.reference_paragraph:
            flagged.append(record.image_id)

    _write_json(out_root / "manifest.json", {
        "kept": kept,
        "dropped": dropped,
        "skipped": skipped,
        "flagged_empty_reference": flagged,
    })
    click.echo(f"kept {len(kept)}, dropped {len(dropped)}, skipped {len(skipped)}")
    if skipped:
        sys.exit(1)


if __name__ == "__main__":
    main()
