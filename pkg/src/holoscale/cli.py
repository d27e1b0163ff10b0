"""Command-line front end.

    holoscale run EXPERIMENT.cdl [--out DIR] [--seed N] [--jmax N] [--mode M] [--quiet]
    holoscale verify [CORPUS_DIR] [--out DIR] [--seed N] [--update] [--quiet]

Exit codes: 0 success, 1 verification mismatch, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .dsl.config import parse_config
from .errors import ConfigError, CorpusMissing, DslError, HoloscaleError
from .pipeline import RunResult, run_experiment

DEFAULT_CORPUS = Path(__file__).resolve().parents[2] / "corpus"

#: report fields compared exactly by verify (the seed-stability contract)
VERDICT_FIELDS = ("case", "normality", "mode", "limit", "type.kind", "type.t_estimate")
#: relative tolerances for numeric fields (by key name); everything else 1e-9
FIELD_RTOL = {"hausdorff_step": 1e-6, "median_norm": 1e-6, "interior_fraction": 1e-6}


def load_config(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_config(text)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_outputs(result: RunResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(result.report), encoding="utf-8")
    (out / "timings.json").write_text(json.dumps(result.timings, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    series = out / "series"
    series.mkdir(exist_ok=True)
    for name, rows in result.series.items():
        with open(series / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows)
    if result.cloud is not None:
        j = result.report["config"]["jmax"]
        (series / f"cloud_j{j}.txt").write_text(result.cloud.to_text(), encoding="utf-8")


def execute(path: Path, out: Path, *, seed=None, jmax=None, mode="auto") -> RunResult:
    cfg = load_config(path)
    result = run_experiment(cfg, name=path.stem, mode=mode, seed=seed, jmax=jmax)
    write_outputs(result, out)
    return result


def _summary(result: RunResult) -> str:
    v = result.report["verdicts"]
    parts = [f"case={v['case']}", f"normality={v['normality']}", f"mode={v['mode']}", f"limit={v['limit']}"]
    if v.get("type"):
        parts.append(f"type={v['type']['kind']}({v['type']['t_estimate']})")
    if v.get("limit_fit"):
        parts.append(f"fit_residual={v['limit_fit']['residual']:.3g}")
    return " ".join(parts)


def default_out(name: str) -> Path:
    return Path(os.environ.get("HOLOSCALE_OUT", "holoscale-out")) / name


def cmd_run(args) -> int:
    path = Path(args.config)
    out = Path(args.out) if args.out else default_out(path.stem)
    result = execute(path, out, seed=args.seed, jmax=args.jmax, mode=args.mode)
    if not args.quiet:
        print(f"{path.stem}: {_summary(result)}")
        for err in result.report["errors"]:
            print(f"  {'note' if err['soft'] else 'error'} [{err['op']}] {err['type']}: {err['message']}")
        print(f"  report: {out / 'report.json'}")
    return 3 if result.hard_errors else 0


# -- verify -----------------------------------------------------------------------

def _get(d, dotted: str):
    for part in dotted.split("."):
        if not isinstance(d, dict) or part not in d:
            return None
        d = d[part]
    return d


def _close(a, b, rtol: float) -> bool:
    if isinstance(a, bool) or isinstance(b, bool) or not isinstance(a, (int, float)) or not isinstance(b, (int, float)):
        return a == b
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + 1e-12


def diff_reports(got, want, path: str = "", rtol: float = 1e-9) -> list[str]:
    """Field-by-field comparison; returns human-readable mismatches."""
    if isinstance(want, dict):
        if not isinstance(got, dict):
            return [f"{path}: expected an object"]
        out = []
        for k in sorted(set(want) | set(got)):
            if k in ("tool",):
                continue
            sub = f"{path}.{k}" if path else k
            if k not in got or k not in want:
                out.append(f"{sub}: present in only one report")
                continue
            out += diff_reports(got[k], want[k], sub, FIELD_RTOL.get(k, rtol))
        return out
    if isinstance(want, list):
        if not isinstance(got, list) or len(got) != len(want):
            return [f"{path}: length differs"]
        out = []
        for i, (g, w) in enumerate(zip(got, want)):
            out += diff_reports(g, w, f"{path}[{i}]", rtol)
        return out
    return [] if _close(got, want, rtol) else [f"{path}: got {got!r}, expected {want!r}"]


def verify_corpus(corpus: Path, out: Path, *, seed=None, update: bool = False) -> tuple[list[str], list[str]]:
    """Re-run every ``*.cdl`` in the corpus and compare against ``golden/*.json``.

    With a seed different from the golden one only verdict fields are compared.
    Returns (passed, failed) lines.
    """
    if not corpus.is_dir():
        raise CorpusMissing(f"corpus directory {corpus} not found", op="verify")
    configs = sorted(corpus.glob("*.cdl"))
    golden = corpus / "golden"
    if not configs:
        raise CorpusMissing(f"no .cdl files in {corpus}", op="verify")
    passed, failed = [], []
    for path in configs:
        result = execute(path, out / path.stem, seed=seed)
        gpath = golden / f"{path.stem}.json"
        if update:
            golden.mkdir(exist_ok=True)
            gpath.write_text(dumps(result.report), encoding="utf-8")
            passed.append(f"UPDATED {path.stem}")
            continue
        if not gpath.exists():
            raise CorpusMissing(f"missing golden report {gpath}", op="verify")
        want = json.loads(gpath.read_text(encoding="utf-8"))
        got = json.loads(dumps(result.report))
        if got["seed"] == want["seed"]:
            problems = diff_reports(got, want)
        else:
            problems = [f"verdicts.{f}: got {_get(got['verdicts'], f)!r}, expected {_get(want['verdicts'], f)!r}"
                        for f in VERDICT_FIELDS if _get(got["verdicts"], f) != _get(want["verdicts"], f)]
        if problems:
            failed.append(f"FAIL {path.stem}: " + "; ".join(problems[:5]))
        else:
            passed.append(f"PASS {path.stem}")
    return passed, failed


def cmd_verify(args) -> int:
    corpus = Path(args.corpus) if args.corpus else DEFAULT_CORPUS
    out = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="holoscale-verify-"))
    passed, failed = verify_corpus(corpus, out, seed=args.seed, update=args.update)
    if not args.quiet:
        for line in passed + failed:
            print(line)
        print(f"{len(passed)} passed, {len(failed)} failed; reports in {out}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holoscale", description="Scaling-method laboratory for domains in C^2.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one .cdl experiment")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: $HOLOSCALE_OUT/<name>)")
    r.add_argument("--seed", type=int)
    r.add_argument("--jmax", type=int)
    r.add_argument("--mode", choices=("frankel", "variety", "auto"), default="auto")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="re-run the corpus and diff against golden reports")
    v.add_argument("corpus", nargs="?")
    v.add_argument("--out")
    v.add_argument("--seed", type=int)
    v.add_argument("--update", action="store_true", help="rewrite the golden reports")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except HoloscaleError as exc:
        kind = "configuration error" if isinstance(exc, DslError) else "numerical failure"
        print(f"holoscale: {kind} in {exc.op or args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
