"""Command line front end: learn, generate, eval, repl, serve, synth.

Every subcommand exits nonzero with a one-line diagnostic on stderr when
something goes wrong; machine-readable output goes to files or stdout.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import logging
import os
from dataclasses import replace
from pathlib import Path

import click

from .catalog import Catalog, load_catalog
from .corpus import extract_observations, load_corpus, save_corpus, synthesize_corpus
from .errors import SceneforgeError
from .geometry import (
    Rect2,
    footprint_on_surface,
    overhang_fraction,
    scene_to_json,
    surface_world_frame,
    surfaces_of,
    world_box,
)
from .interact import SceneState
from .lang import parse_description
from .layout import (
    CONDITIONS,
    LayoutConfig,
    generate,
    relation_score,
    score_layout,
    validate_scene,
)
from .priors import KnowledgeBase, build_kb, load_kb, save_kb
from .service import SessionEngine, build_app, save_session

_CONDITION_CHOICE = click.Choice(sorted(CONDITIONS))

# substrings of validator messages that mean broken support, as opposed
# to a collision or an overhang
_SUPPORT_MARKERS = (
    "support parent",
    "different parent",
    "missing on",
    "attachment face",
)


def _cli_errors(fn):
    """Translate domain errors into a clean one-line exit."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SceneforgeError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
def main():
    """Text-to-3D-scene toolkit."""
    logging.basicConfig(level=os.environ.get("SCENEFORGE_LOG", "WARNING").upper())


def _load_kb_catalog(kb_path: str, catalog_path: str) -> tuple[KnowledgeBase, Catalog]:
    return load_kb(kb_path), load_catalog(catalog_path)


# ---------------------------------------------------------------------------
# synth / learn


@main.command()
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--scenes", default=100, show_default=True, help="Corpus size.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_cli_errors
def synth(catalog_path, scenes, seed, out_dir):
    """Write a synthetic training corpus directory."""
    catalog = load_catalog(catalog_path)
    corpus = synthesize_corpus(catalog, scenes, seed)
    save_corpus(corpus, out_dir, catalog)
    click.echo(f"wrote {len(corpus.scenes)} scenes to {out_dir}")


@main.command()
@click.option("--corpus", "corpus_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@_cli_errors
def learn(corpus_dir, catalog_path, out_path):
    """Estimate the knowledge base from a scene corpus."""
    catalog = load_catalog(catalog_path)
    corpus, _ = load_corpus(corpus_dir, catalog)
    if not corpus.scenes:
        raise SceneforgeError(f"{corpus_dir}: corpus contains no scenes")
    obs = extract_observations(corpus, catalog)
    kb = build_kb(obs, catalog.taxonomy)
    save_kb(kb, out_path)
    click.echo(f"occurrence rows:      {len(kb.occ)}")
    click.echo(f"support rows:         {sum(len(v) for v in kb.support.values())}")
    click.echo(f"surface rows:         {sum(len(v) for v in kb.surf_sup.values())}")
    click.echo(f"relative-pos tables:  {len(kb.relpos)}")
    click.echo(f"wrote {out_path}")


# ---------------------------------------------------------------------------
# generate


def _max_overhang(scene, catalog: Catalog) -> float:
    worst = 0.0
    root = scene.root_id()
    for inst in scene.instances:
        if inst.id == root:
            continue
        parent = scene.instance(scene.support_edges[inst.id])
        surf = surfaces_of(catalog.by_id[parent.model_id])[inst.placement.support_surface]
        _, _, _, _, (hu, hv) = surface_world_frame(surf, parent.transform)
        fp = footprint_on_surface(
            world_box(inst, catalog.by_id[inst.model_id]), surf, parent.transform
        )
        worst = max(worst, overhang_fraction(fp, Rect2(center=(0.0, 0.0), half=(hu, hv))))
    return worst


@main.command("generate")
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--text", default=None, help="Scene description.")
@click.option("--file", "text_file", default=None, type=click.Path(exists=True),
              help="File holding the description.")
@click.option("--seed", default=0, show_default=True)
@click.option("--condition", default="full", type=_CONDITION_CHOICE, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@_cli_errors
def generate_cmd(kb_path, catalog_path, text, text_file, seed, condition, out_path):
    """Generate one scene from a description and write scene + score report."""
    if (text is None) == (text_file is None):
        raise click.UsageError("provide exactly one of --text and --file")
    if text is None:
        text = Path(text_file).read_text(encoding="utf-8").strip()
    kb, catalog = _load_kb_catalog(kb_path, catalog_path)
    cfg = LayoutConfig(rng_seed=seed, flags=CONDITIONS[condition])
    t = parse_description(text, catalog.taxonomy)
    scene, t = generate(t, catalog, kb, cfg)
    total, l_obj, l_rel = score_layout(scene, t, kb, catalog, cfg)
    problems = validate_scene(scene, catalog)
    report = {
        "L": total,
        "L_obj": l_obj,
        "L_rel": l_rel,
        "collisions": sum("collision" in p for p in problems),
        "overhangMax": _max_overhang(scene, catalog),
        "degraded": bool(scene.degraded),
    }
    out = Path(out_path)
    out.write_text(scene_to_json(scene, catalog) + "\n", encoding="utf-8")
    report_path = out.with_suffix(".report.json")
    report_path.write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(
        f"wrote {out} ({len(scene.instances)} instances), "
        f"L={total:.4f}, report in {report_path}"
    )


# ---------------------------------------------------------------------------
# eval


def read_descriptions(path: str | Path) -> list[str]:
    """Description suite file: JSON {"descriptions": [...]} or one per line."""
    p = Path(path)
    raw = p.read_text(encoding="utf-8")
    if p.suffix == ".json":
        return list(json.loads(raw)["descriptions"])
    lines = [ln.strip() for ln in raw.splitlines()]
    return [ln for ln in lines if ln and not ln.startswith("#")]


def harness_rows(
    kb: KnowledgeBase,
    catalog: Catalog,
    descriptions: list[str],
    conditions: list[str],
    seeds: int,
    cfg: LayoutConfig | None = None,
) -> list[dict]:
    """One row per condition x description x seed, in that sort order.

    constraint_satisfaction averages relation_score over the explicit
    (non-inferred) template constraints; support_validity is the fraction
    of supported instances whose resting contact checks out.
    """
    base = cfg if cfg is not None else LayoutConfig()
    rows = []
    for cond in conditions:
        if cond not in CONDITIONS:
            raise SceneforgeError(
                f"unknown condition {cond!r}; choose from {sorted(CONDITIONS)}"
            )
    for cond in conditions:
        flags = CONDITIONS[cond]
        for di, text in enumerate(descriptions):
            t0 = parse_description(text, catalog.taxonomy)
            for seed in range(seeds):
                cfg_run = replace(base, rng_seed=seed, flags=flags)
                scene, t = generate(t0, catalog, kb, cfg_run)
                total, l_obj, l_rel = score_layout(scene, t, kb, catalog, cfg_run)
                explicit = [c for c in t.constraints if not c.inferred]
                sat = (
                    sum(relation_score(c, scene, catalog) for c in explicit)
                    / len(explicit)
                    if explicit
                    else 1.0
                )
                problems = validate_scene(scene, catalog)
                bad_support = {
                    p.split(":", 1)[0]
                    for p in problems
                    if any(m in p for m in _SUPPORT_MARKERS)
                }
                n_supported = sum(
                    1 for i in scene.instances if i.id != scene.root_id()
                )
                rows.append(
                    {
                        "condition": cond,
                        "description_index": di,
                        "seed": seed,
                        "constraint_satisfaction": sat,
                        "collisions": sum("collision" in p for p in problems),
                        "support_validity": (
                            1.0 - len(bad_support) / n_supported
                            if n_supported
                            else 1.0
                        ),
                        "L": total,
                        "L_obj": l_obj,
                        "L_rel": l_rel,
                        "degraded": int(scene.degraded),
                    }
                )
    return rows


_ROW_FIELDS = [
    "condition", "description_index", "seed", "constraint_satisfaction",
    "collisions", "support_validity", "L", "L_obj", "L_rel", "degraded",
]


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=_ROW_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _summarize(rows: list[dict]) -> str:
    lines = [
        f"{'condition':<12} {'satisfaction':>12} {'collisions':>10} "
        f"{'support':>8} {'mean L':>10} {'degraded':>8}"
    ]
    for cond in dict.fromkeys(r["condition"] for r in rows):
        sub = [r for r in rows if r["condition"] == cond]
        n = len(sub)
        lines.append(
            f"{cond:<12} "
            f"{sum(r['constraint_satisfaction'] for r in sub) / n:>12.3f} "
            f"{sum(r['collisions'] for r in sub):>10d} "
            f"{sum(r['support_validity'] for r in sub) / n:>8.3f} "
            f"{sum(r['L'] for r in sub) / n:>10.4f} "
            f"{sum(r['degraded'] for r in sub):>8d}"
        )
    return "\n".join(lines)


@main.command("eval")
@click.argument("descriptions_file", type=click.Path(exists=True))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--conditions", default="basic,full", show_default=True,
              help="Comma-separated condition names.")
@click.option("--seeds", default=5, show_default=True, help="Seeds 0..N-1 per description.")
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", show_default=True,
              type=click.Choice(["csv", "json"]))
@_cli_errors
def eval_cmd(descriptions_file, kb_path, catalog_path, conditions, seeds, out_path, fmt):
    """Run the generation harness over a description suite."""
    kb, catalog = _load_kb_catalog(kb_path, catalog_path)
    descriptions = read_descriptions(descriptions_file)
    if not descriptions:
        raise SceneforgeError(f"{descriptions_file}: no descriptions found")
    rows = harness_rows(
        kb, catalog, descriptions, [c.strip() for c in conditions.split(",")], seeds
    )
    blob = (
        _rows_to_csv(rows)
        if fmt == "csv"
        else json.dumps(rows, indent=2, sort_keys=True) + "\n"
    )
    if out_path:
        Path(out_path).write_text(blob, encoding="utf-8")
        click.echo(f"wrote {len(rows)} rows to {out_path}")
        click.echo(_summarize(rows))
    else:
        click.echo(blob, nl=False)
        click.echo(_summarize(rows), err=True)


# ---------------------------------------------------------------------------
# repl


def render_text(z: SceneState, catalog: Catalog) -> str:
    """Support tree with placements; selected instances are starred."""
    scene = z.scene
    lines = []

    def walk(iid: str, depth: int) -> None:
        inst = scene.instance(iid)
        cat = (
            z.template.objects[inst.object_index].category
            if inst.object_index is not None
            else "?"
        )
        mark = "*" if iid in z.selection else " "
        x, y, h = inst.transform.translation
        lines.append(
            f"{mark} {'  ' * depth}{iid} {cat} [{inst.model_id}] "
            f"at ({x:+.2f}, {y:+.2f}, {h:+.2f}) "
            f"yaw={inst.transform.yaw:+.2f} scale={inst.transform.scale:.2f}"
        )
        for child in sorted(scene.children_of(iid)):
            walk(child, depth + 1)

    root = scene.root_id()
    if root is not None:
        walk(root, 0)
    return "\n".join(lines)


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--condition", default="full", type=_CONDITION_CHOICE, show_default=True)
@_cli_errors
def repl(kb_path, catalog_path, seed, condition):
    """Interactive loop: describe a scene, then refine it line by line."""
    kb, catalog = _load_kb_catalog(kb_path, catalog_path)
    engine = SessionEngine(kb, catalog)
    session = engine.create(seed=seed, condition=condition)
    click.echo('describe a scene, or type commands; ":save PATH" and ":quit"')
    while True:
        try:
            line = input("sceneforge> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line.startswith(":"):
            parts = line.split(maxsplit=1)
            if parts[0] in (":quit", ":q"):
                break
            if parts[0] == ":save":
                if len(parts) != 2:
                    click.echo("usage: :save PATH", err=True)
                    continue
                save_session(engine.get(session.id), parts[1])
                click.echo(f"saved to {parts[1]}")
                continue
            click.echo(f"unknown meta command {parts[0]!r}", err=True)
            continue
        try:
            resp = engine.submit(session.id, line)
        except SceneforgeError as exc:
            click.echo(f"error: {exc}", err=True)
            continue
        for w in resp["warnings"]:
            click.echo(f"warning: {w}", err=True)
        if resp["degradedFlag"]:
            click.echo("note: layout is degraded (relaxed placement)", err=True)
        click.echo(render_text(engine.get(session.id).state, catalog))


# ---------------------------------------------------------------------------
# serve


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@_cli_errors
def serve(kb_path, catalog_path, host, port):
    """Run the HTTP session service."""
    import uvicorn

    kb, catalog = _load_kb_catalog(kb_path, catalog_path)
    app = build_app(kb, catalog)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main(prog_name="sceneforge")
