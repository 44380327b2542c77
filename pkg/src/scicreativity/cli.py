"""Command-line entry point: ``scicreativity <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np

from . import export
from .aggregation import Aggregator
from .corpus import AnalysisConfig, Corpus, errors_only, validate_corpus
from .decomposition import Decomposer
from .dependency import (citation_counts, cited_by_year, impact_correlation, paper_level_dependency,
                         topic_level_dependency)
from .ingest import ParseError, build_cocitation_index, parse_papers, parse_readings, parse_topic_hierarchy
from .metrics import PairScorer, paper_creativity, rarity
from .optimizer import LAZY_THRESHOLD, TargetSet, build_reward_instance, greedy_select, precision
from .temporal import InsufficientIntervals, TemporalDecayModel, collect_intervals, fit_decay

log = logging.getLogger("scicreativity")


class InputError(Exception):
    """Bad or inconsistent input files; maps to exit status 1."""


# ---------------------------------------------------------------------------
# loading


class Workspace:
    def __init__(self, args):
        self.args = args
        self.hierarchy = _parse(args.topics, parse_topic_hierarchy)
        self.papers = _parse(args.papers, lambda fh: parse_papers(fh, self.hierarchy))
        report = validate_corpus(self.papers, self.hierarchy)
        for v in report:
            (log.error if v.severity == "error" else log.debug)("%s", v)
        errs = errors_only(report)
        if errs:
            raise InputError(f"corpus failed validation with {len(errs)} error(s); first: {errs[0]}")
        self.corpus = Corpus(self.papers)
        self.config = AnalysisConfig(sigma=args.sigma, aggregator=Aggregator.parse(args.aggregate),
                                     budget_rho=getattr(args, "budget", None) or 10, rng_seed=args.seed,
                                     decay_mode=getattr(args, "decay", "none"))
        self.readings = None
        if getattr(args, "readings", None):
            self.readings = _parse(args.readings, parse_readings)
        self._index = None
        self._scorer = None

    @property
    def index(self):
        if self._index is None:
            self._index = build_cocitation_index(self.papers)
        return self._index

    @property
    def scorer(self) -> PairScorer:
        if self._scorer is None:
            self._scorer = PairScorer(self.corpus, self.hierarchy, self.index, self.config.sigma)
        return self._scorer

    def selected_papers(self):
        years = getattr(self.args, "year", None)
        return [p.id for p in self.corpus if not years or p.publish_year in years]

    def groups(self, ids):
        """``[(suffix, ids)]``; one group per discipline when requested."""
        if not getattr(self.args, "group_by_discipline", False):
            return [("", ids)]
        buckets = {}
        for pid in ids:
            disc = self.hierarchy.discipline_of(self.corpus[pid].topics) or "none"
            buckets.setdefault(disc, []).append(pid)
        return [(f".{d}", buckets[d]) for d in sorted(buckets)]


def _parse(path, parser):
    try:
        with open(path, "rb") as fh:
            return parser(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _out_path(path, suffix):
    if not suffix:
        return path
    stem, ext = os.path.splitext(path)
    return f"{stem}{suffix}{ext or '.csv'}"


def _writer(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        export.write_csv(fh, header, rows)


def _pmap(fn, items, threads):
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _years(text):
    if text is None:
        return None
    out = set()
    for part in text.split(","):
        if ":" in part:
            a, b = part.split(":")
            out.update(range(int(a), int(b) + 1))
        elif part:
            out.add(int(part))
    return out


def _decay_for(ws: Workspace, mode: str):
    """Decay model and candidate-time function for a decay mode (None, None for 'none')."""
    args = ws.args
    if mode == "none":
        return None, None
    if mode == "reading" and ws.readings is None:
        raise InputError("--decay reading needs --readings")
    if getattr(args, "decay_model", None):
        with open(args.decay_model) as fh:
            model = TemporalDecayModel.load(fh)
    else:
        try:
            model = fit_decay(collect_intervals(ws.corpus, ws.readings, mode), args.bin, mode)
        except InsufficientIntervals as exc:
            raise InputError(str(exc)) from None
    if mode == "reading":
        return model, ws.readings.reading_time_years
    return model, lambda x: float(ws.corpus[x].publish_year)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    hierarchy = _parse(args.topics, parse_topic_hierarchy)
    papers = _parse(args.papers, lambda fh: parse_papers(fh, hierarchy))
    report = validate_corpus(papers, hierarchy)
    lines = [str(v) for v in report]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("".join(line + "\n" for line in lines))
    else:
        for line in lines:
            print(line)
    n_err = len(errors_only(report))
    print(f"{len(papers)} papers, {len(hierarchy)} topics: {n_err} error(s), "
          f"{len(report) - n_err} warning(s)", file=sys.stderr)
    return 1 if n_err else 0


def cmd_score(args) -> int:
    ws = Workspace(args)
    ids = ws.selected_papers()
    results = _pmap(lambda k: paper_creativity(ws.hierarchy, ws.index, ws.corpus, k, ws.config), ids, args.threads)
    by_id = {r.paper_id: r for r in results}
    for suffix, group in ws.groups(ids):
        _writer(_out_path(args.out, suffix), ["paper_id", "year", "phi", "n_pairs", "flag"],
                ([k, ws.corpus[k].publish_year, by_id[k].phi, len(by_id[k].trace), by_id[k].flag] for k in group))
        if args.pairs_out:
            _writer(_out_path(args.pairs_out, suffix), ["paper_id", "i", "j", "year", "rarity", "disconnect", "phi"],
                    ([k, s.i, s.j, s.year, s.rarity, s.disconnect, s.creativity]
                     for k in group for s in by_id[k].trace))
    flagged = sum(1 for r in results if r.flag)
    print(f"scored {len(results)} papers ({flagged} with fewer than two usable references)", file=sys.stderr)
    return 0


def cmd_decompose(args) -> int:
    ws = Workspace(args)
    if ws.readings is None:
        raise InputError("decompose needs --readings")
    decay, time_of = _decay_for(ws, args.decay)
    decomposer = Decomposer(ws.scorer, ws.readings.paper_ids(), ws.config, decay, time_of)
    ids = ws.selected_papers()
    runs = []
    for r in range(args.repeat):
        seed = args.seed + r
        runs.append(_pmap(lambda k: decomposer.decompose(k, seed), ids, args.threads))
    first = runs[0]
    header = ["paper_id", "phi", "psi", "chi", "n_pairs", "n_pairs_with_enabler", "flag"]
    if args.repeat > 1:
        header[4:4] = ["psi_std", "chi_std"]

    def row(n):
        res = first[n]
        if args.repeat == 1:
            return [res.paper_id, res.phi, res.psi, res.chi, res.n_pairs, res.n_pairs_with_enabler, res.flag]
        psis = [run[n].psi for run in runs]
        chis = [run[n].chi for run in runs]
        return [res.paper_id, res.phi, statistics.fmean(psis), statistics.fmean(chis),
                statistics.stdev(psis), statistics.stdev(chis), res.n_pairs, res.n_pairs_with_enabler, res.flag]

    pos = {k: n for n, k in enumerate(ids)}
    for suffix, group in ws.groups(ids):
        _writer(_out_path(args.out, suffix), header, (row(pos[k]) for k in group))
        if args.pairs_out:
            _writer(_out_path(args.pairs_out, suffix), ["paper_id", "i", "j", "phi", "enabler", "delta"],
                    ([k, p.i, p.j, p.phi, p.enabler or "", p.delta] for k in group for p in first[pos[k]].pairs))
    if args.correlation_out:
        counts = citation_counts(ws.corpus)
        rows = []
        for suffix, group in ws.groups(ids):
            try:
                corr = impact_correlation([first[pos[k]] for k in group], counts)
                rows.append([suffix.lstrip(".") or "all", corr.preparation, corr.inspiration, corr.n])
            except ValueError:
                rows.append([suffix.lstrip(".") or "all", None, None, 0])
        _writer(args.correlation_out, ["group", "pearson_psi_citations", "pearson_chi_citations", "n"], rows)
    dropped = sum(1 for r in first if r.psi > 0)
    print(f"decomposed {len(first)} papers; {dropped} with positive preparation", file=sys.stderr)
    return 0


def cmd_fit_temporal(args) -> int:
    hierarchy = _parse(args.topics, parse_topic_hierarchy) if args.topics else None
    papers = _parse(args.papers, lambda fh: parse_papers(fh, hierarchy))
    readings = _parse(args.readings, parse_readings) if args.readings else None
    if args.mode == "reading" and readings is None:
        raise InputError("--mode reading needs --readings")
    try:
        model = fit_decay(collect_intervals(Corpus(papers), readings, args.mode), args.bin, args.mode)
    except InsufficientIntervals as exc:
        raise InputError(str(exc)) from None
    with open(args.out, "w") as fh:
        model.save(fh)
    print(f"fitted {args.mode} decay on {model.n_samples} intervals", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    ws = Workspace(args)
    targets = set(args.target or [])
    if args.target_year is not None:
        targets.update(p.id for p in ws.corpus.published_in(args.target_year))
    missing = [k for k in targets if k not in ws.corpus]
    if missing:
        raise InputError(f"unknown target paper(s): {', '.join(sorted(missing))}")
    if not targets:
        raise InputError("no target papers; use --target or --target-year")
    cutoff = args.candidates_before
    if cutoff is None:
        cutoff = min(ws.corpus[k].publish_year for k in targets)
    candidates = [p.id for p in ws.corpus if p.publish_year < cutoff]
    instance = build_reward_instance(ws.scorer, TargetSet.uniform(targets), candidates, ws.config.aggregator)
    if instance.n_candidates == 0:
        raise InputError("no candidate papers before the cutoff year")
    if args.decay == "reading":
        raise InputError("predict supports --decay none or publishing")
    decay, _ = _decay_for(ws, args.decay)
    lazy = {"on": True, "off": False}.get(args.lazy)
    if lazy is None:
        lazy = instance.n_candidates > LAZY_THRESHOLD and ws.config.aggregator.kind == "average"
    rng = np.random.default_rng(args.seed)
    result = greedy_select(instance, args.budget, decay, rng, lazy)
    _writer(args.out, ["step", "paper_id", "marginal_gain", "cumulative_R", "accepted_probability"],
            ([n + 1, x, g, c, p] for n, (x, g, c, p) in
             enumerate(zip(result.selected, result.gains, result.cumulative, result.accepted_probability))))
    summary = (f"targets={len(targets)} candidates={instance.n_candidates} selected={len(result.selected)} "
               f"reward={result.reward!r} evaluations={result.evaluations} lazy={lazy}")
    if ws.readings is not None and result.selected:
        summary += f" precision={precision(result.selected, ws.readings.paper_ids())!r}"
    print(summary)
    return 0


def dependency_rows(ws: Workspace, prod_years, read_years):
    corpus, readings = ws.corpus, ws.readings
    read_sets = {t: readings.read_in(t) for t in read_years}
    header = ["measure", "t"] + [str(t) for t in read_years]
    rows = []
    for measure in ("paper", "topic"):
        for t in prod_years:
            row = [measure, t]
            cited = cited_by_year(corpus, t)
            published = corpus.published_in(t)
            for tr in read_years:
                try:
                    if measure == "paper":
                        row.append(paper_level_dependency(cited, read_sets[tr]))
                    else:
                        read = [corpus[x] for x in sorted(read_sets[tr]) if x in corpus]
                        row.append(topic_level_dependency(published, read, ws.hierarchy, ws.config.sigma, ws.scorer))
                except ValueError:
                    row.append(None)
            rows.append(row)
    return header, rows


def _default_years(ws):
    prod = sorted(_years(ws.args.years) or ws.corpus.years())
    if ws.args.reading_years:
        read = sorted(_years(ws.args.reading_years))
    else:
        read = sorted({ws.readings.reading_year(x) for x in ws.readings.paper_ids()})
    return prod, read


def cmd_dependency(args) -> int:
    ws = Workspace(args)
    if ws.readings is None:
        raise InputError("dependency needs --readings")
    header, rows = dependency_rows(ws, *_default_years(ws))
    _writer(args.out, header, rows)
    return 0


def cmd_export(args) -> int:
    ws = Workspace(args)
    kind = args.kind
    ids = ws.selected_papers()
    if kind == "rarity_cdf":
        values = []
        for k in ids:
            p = ws.corpus[k]
            values.extend(rarity(ws.index, a, b, p.publish_year) for a, b in combinations(sorted(set(p.references)), 2))
        _writer(args.out, ["rarity", "cdf"], export.empirical_cdf(values))
    elif kind in ("score_histogram", "creativity_cdf"):
        results = [paper_creativity(ws.hierarchy, ws.index, ws.corpus, k, ws.config) for k in ids]
        if kind == "creativity_cdf":
            _writer(args.out, ["creativity", "cdf"], export.empirical_cdf(r.phi for r in results if not r.flag))
        else:
            scores = [s.creativity for r in results for s in r.trace]
            rows = export.histogram(scores, bins=args.bins, bin_width=None if args.bins else (args.bin_width or 0.05),
                                    hi=1.0)
            _writer(args.out, ["bin_left", "bin_right", "count"], rows)
    elif kind == "interval_histogram":
        if args.mode == "reading" and ws.readings is None:
            raise InputError("reading intervals need --readings")
        try:
            values = collect_intervals(ws.corpus, ws.readings, args.mode)
        except InsufficientIntervals as exc:
            raise InputError(str(exc)) from None
        rows = export.histogram(values, bins=args.bins, bin_width=None if args.bins else (args.bin_width or 1.0),
                                hi=None if not args.bins else max(values))
        _writer(args.out, ["bin_left", "bin_right", "count"], rows)
    elif kind == "dependency_matrix":
        if ws.readings is None:
            raise InputError("dependency_matrix needs --readings")
        header, rows = dependency_rows(ws, *_default_years(ws))
        _writer(args.out, header, rows)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--papers", required=True)
    common.add_argument("--topics", required=True)
    common.add_argument("--sigma", type=float, default=0.8)
    common.add_argument("--aggregate", default="avg", help="avg | median | max | p:<q>")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--year", type=_years, help="restrict to papers published in these years (e.g. 2011 or 2008:2011)")
    common.add_argument("--group-by-discipline", action="store_true")
    common.add_argument("--log-level", default="WARNING")

    ap = argparse.ArgumentParser(prog="scicreativity", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate")
    p.add_argument("--papers", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--out")
    p.add_argument("--log-level", default="WARNING")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", parents=[common])
    p.add_argument("--out", required=True)
    p.add_argument("--pairs-out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("decompose", parents=[common])
    p.add_argument("--readings", required=True)
    p.add_argument("--decay", choices=("none", "reading", "publishing"), default="none")
    p.add_argument("--decay-model", help="load a saved decay model instead of fitting one")
    p.add_argument("--bin", type=float, default=1.0)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--out", default="decomposition.csv")
    p.add_argument("--pairs-out")
    p.add_argument("--correlation-out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("fit-temporal")
    p.add_argument("--papers", required=True)
    p.add_argument("--topics")
    p.add_argument("--readings")
    p.add_argument("--mode", choices=("reading", "publishing"), default="reading")
    p.add_argument("--bin", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--log-level", default="WARNING")
    p.set_defaults(func=cmd_fit_temporal)

    p = sub.add_parser("predict", parents=[common])
    p.add_argument("--readings")
    p.add_argument("--target", action="append")
    p.add_argument("--target-year", type=int)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--candidates-before", "--cutoff-year", dest="candidates_before", type=int,
                   help="only papers published before this year are candidates (default: earliest target year)")
    p.add_argument("--decay", choices=("none", "reading", "publishing"), default="none")
    p.add_argument("--decay-model")
    p.add_argument("--bin", type=float, default=1.0)
    p.add_argument("--lazy", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--out", default="selection.csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("dependency", parents=[common])
    p.add_argument("--readings", required=True)
    p.add_argument("--years", help="production years, e.g. 2007:2014")
    p.add_argument("--reading-years", help="consumption years, e.g. 2006:2009")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dependency)

    p = sub.add_parser("export-plot-data", parents=[common])
    p.add_argument("--kind", required=True, choices=export.PLOT_KINDS)
    p.add_argument("--readings")
    p.add_argument("--mode", choices=("reading", "publishing"), default="reading")
    p.add_argument("--bins", type=int)
    p.add_argument("--bin-width", type=float)
    p.add_argument("--years")
    p.add_argument("--reading-years")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "budget", 1) is not None and getattr(args, "budget", 1) < 1:
        parser.print_usage(sys.stderr)
        print("error: --budget must be at least 1", file=sys.stderr)
        return 2
    if getattr(args, "repeat", 1) < 1:
        print("error: --repeat must be at least 1", file=sys.stderr)
        return 2
    try:
        Aggregator.parse(getattr(args, "aggregate", "avg"))
        if hasattr(args, "sigma") and not (0.0 < args.sigma <= 1.0):
            raise ValueError("--sigma must lie in (0, 1]")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
