"""Command-line entry point: ``brownian-lab <group> <command>``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from contextlib import contextmanager
from fractions import Fraction

import click
import numpy as np

from . import __version__
from . import brownian as bm
from . import gaussian, kc_bounds, metric_cover, setsystems, stats
from .exceptions import BrownianLabError, UnknownSuite
from .reports import SuiteReport, TestReport

DEFAULT_TIMES = tuple(0.25 * k for k in range(1, 9))
INVERSION_TIMES = (0.25, 0.5, 1.0, 2.0, 4.0)
DRIFT_TIMES = (1.0, 10.0, 100.0)
SUITES = ("cov", "moments", "scaling", "markov", "inversion", "drift", "holder")
SUITE_PATHS = {"holder": bm.PROFILE_PATHS}
MOMENT_TARGET = 3.0
MOMENT_TOL = 0.15
DRIFT_THRESHOLD = 0.5
DRIFT_TOL = 0.01
HOLDER_LEVELS = (8, 10, 12, 14)
HOLDER_GROWTH_TOL = 0.5
SAMPLE_CHUNK = 8192


class ConfigError(click.ClickException):
    exit_code = 2


def _floats(text):
    return tuple(float(Fraction(v.strip())) for v in text.split(",") if v.strip())


@contextmanager
def _atomic_output(path):
    """Write to a temporary sibling, then rename; ``-`` means stdout."""
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finish(report, out):
    with _atomic_output(out) as fh:
        fh.write(report.to_json())
    sys.exit(0 if report.passed else 1)


@click.group()
@click.version_option(__version__, prog_name="brownian-lab")
def main():
    """Brownian motion construction toolkit."""


# ---------------------------------------------------------------------------
# bm


@main.group("bm")
def bm_group():
    """Path sampling and law-level verification suites."""


@bm_group.command("sample")
@click.option("--level", type=click.IntRange(0, 24), default=bm.DEFAULT_LEVEL, show_default=True)
@click.option("--paths", type=click.IntRange(min=1), default=bm.DEFAULT_COUNT, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--horizon", type=float, default=bm.DEFAULT_HORIZON, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["ndjson", "csv"]), default="ndjson", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="-", help="Output file (default stdout).")
def bm_sample(level, paths, seed, horizon, fmt, out):
    """Sample Brownian paths on a dyadic grid of [0, horizon]."""
    if not horizon > 0:
        raise click.BadParameter("must be positive", param_hint="--horizon")
    grid = bm.DyadicGrid(horizon, level)
    with _atomic_output(out) as fh:
        if fmt == "csv":
            fh.write("path,t,x\n")
        for lo in range(0, paths, SAMPLE_CHUNK):
            ens = bm.sample_increments(grid, seed, min(SAMPLE_CHUNK, paths - lo), start=lo)
            if fmt == "csv":
                bm.write_csv(ens, fh, header=False)
            else:
                bm.write_ndjson(ens, fh)


def _suite_cov(seed, paths, times):
    ens = bm.sample_increments(times, seed, paths)
    return bm.covariance_kernel_reports(ens, seed=seed), {"times": list(times)}


def _suite_moments(seed, paths, times):
    ens = bm.sample_increments(times, seed, paths)
    tests = [
        TestReport(f"E|dB|^4/dt^2({s:g},{t:g})", v, MOMENT_TARGET, MOMENT_TOL, count=paths, seed=seed)
        for (s, t), v in bm.moment_ratio_matrix(ens, 4).items()
    ]
    return tests, {"times": list(times)}


def _suite_scaling(seed, paths, times, c=4.0):
    ens = bm.transform(bm.sample_increments(times, seed, paths), bm.Scaling(c))
    return bm.covariance_kernel_reports(ens, seed=seed), {"times": list(times), "c": c}


def _suite_markov(seed, paths, times, t0=0.5):
    ens = bm.sample_increments(times, seed, paths)
    joint, split = bm.markov_split(ens, t0)
    tests = [stats.gaussian_cov_independence_test(joint, split, seed=seed)]
    tests += bm.covariance_kernel_reports(bm.transform(ens, bm.Shift(t0)), seed=seed)
    return tests, {"times": list(times), "t0": t0}


def _suite_inversion(seed, paths, times):
    ens = bm.transform(bm.inversion_ensemble(times, seed, paths), bm.Inversion())
    return bm.covariance_kernel_reports(ens, seed=seed), {"times": list(times)}


def _suite_drift(seed, paths, times):
    ens = bm.transform(bm.sample_increments(times, seed, paths), bm.DriftRatio())
    frac = float(np.mean(np.abs(ens.paths[:, -1]) > DRIFT_THRESHOLD))
    name = f"P(|B_T/T|>{DRIFT_THRESHOLD:g}) at T={times[-1]:g}"
    return [TestReport(name, frac, 0.0, DRIFT_TOL, count=paths, seed=seed)], {"times": list(times)}


def _suite_holder(seed, paths, times):
    rising = bm.holder_divergence_profile(0.55, HOLDER_LEVELS, paths=paths, seed=seed)
    stable = bm.holder_divergence_profile(0.45, HOLDER_LEVELS, paths=paths, seed=seed)
    steps = [b > a for a, b in zip(rising.medians, rising.medians[1:])]
    tests = [
        # every consecutive median must rise: fraction of rising steps is exactly 1
        TestReport("holder beta=0.55 rising steps", sum(steps) / len(steps), 1.0, 0.0,
                   count=paths, seed=seed, note=f"medians {rising.medians}"),
        TestReport("holder beta=0.45 final/initial median", stable.growth, 1.0, HOLDER_GROWTH_TOL,
                   count=paths, seed=seed, note=f"medians {stable.medians}"),
    ]
    config = {"levels": list(HOLDER_LEVELS), "window": bm.PROFILE_WINDOW,
              "medians_0.55": list(rising.medians), "medians_0.45": list(stable.medians)}
    return tests, config


SUITE_RUNNERS = {
    "cov": (_suite_cov, DEFAULT_TIMES),
    "moments": (_suite_moments, DEFAULT_TIMES),
    "scaling": (_suite_scaling, DEFAULT_TIMES),
    "markov": (_suite_markov, DEFAULT_TIMES),
    "inversion": (_suite_inversion, INVERSION_TIMES),
    "drift": (_suite_drift, DRIFT_TIMES),
    "holder": (_suite_holder, ()),
}


def run_suite(suite, seed=0, paths=None, times=None):
    """Run one verification suite and return its :class:`SuiteReport`."""
    if suite not in SUITE_RUNNERS:
        raise UnknownSuite(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    runner, default_times = SUITE_RUNNERS[suite]
    count = SUITE_PATHS.get(suite, bm.DEFAULT_COUNT) if paths is None else paths
    grid = default_times if times is None else times
    tests, extra = runner(seed, count, grid)
    config = {"seed": seed, "paths": count, **extra}
    return SuiteReport(suite, config, tests)


@bm_group.command("verify")
@click.option("--suite", required=True, help=f"One of: {', '.join(SUITES)}.")
@click.option("--paths", type=click.IntRange(min=2), default=None, help="Paths (suite default if omitted).")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--times", default=None, help="Comma-separated grid times (suite default if omitted).")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="-")
def bm_verify(suite, paths, seed, times, fmt, out):
    """Run a law-level verification suite and write a JSON report."""
    try:
        report = run_suite(suite, seed, paths, None if times is None else _floats(times))
    except (BrownianLabError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    _finish(report, out)


# ---------------------------------------------------------------------------
# kc


@main.group("kc")
def kc_group():
    """Kolmogorov-Chentsov constants and Monte Carlo checks."""


@kc_group.command("bound")
@click.option("--p", "p", type=float, required=True)
@click.option("--q", "q", type=float, required=True)
@click.option("--d", "d", type=float, required=True)
@click.option("--c", "c", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, required=True)
@click.option("--diam", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, help="Accepted for uniformity; unused.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def kc_bound(p, q, d, c, beta, diam, seed, fmt):
    """Print R_p, the constant L and the per-k series terms."""
    try:
        rp = kc_bounds.rp_constant(p, q, d)
        series = kc_bounds.chentsov_constant_L(p, q, c, d, beta, diam)
    except BrownianLabError as exc:
        raise ConfigError(str(exc)) from exc
    if fmt == "json":
        click.echo(json.dumps({
            "p": p, "q": q, "d": d, "c": c, "beta": beta, "diam": diam,
            "R_p": rp, "L": series.value, "tail_bound": series.tail_bound,
            "subset_constant": series.subset_constant, "terms": list(series.terms),
            "version": __version__,
        }))
        return
    click.echo(f"R_p = {rp!r}")
    click.echo(f"L = {series.value!r}  (tail bound {series.tail_bound:.3e}, {len(series.terms)} terms)")
    for k, t in enumerate(series.terms):
        click.echo(f"  k={k:4d}  {t!r}")


def _load_ensemble(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return bm.read_csv(text) if text.startswith("path,t,x") else bm.read_ndjson(text)


@kc_group.command("check")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Ensemble file (csv or ndjson); sampled afresh if omitted.")
@click.option("--level", type=click.IntRange(0, 16), default=8, show_default=True)
@click.option("--paths", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--p", "p", type=float, default=4.0, show_default=True)
@click.option("--q", "q", type=float, default=2.0, show_default=True)
@click.option("--M", "M", type=float, default=3.0, show_default=True)
@click.option("--beta", type=float, default=0.2, show_default=True)
@click.option("--c", "c", type=float, default=1.0, show_default=True)
@click.option("--d", "d", type=float, default=1.0, show_default=True)
@click.option("--diam", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="-")
def kc_check(input_path, level, paths, seed, p, q, M, beta, c, d, diam, fmt, out):
    """Monte Carlo check of E sup ratio^p <= M L."""
    if input_path:
        ens = _load_ensemble(input_path)
    else:
        ens = bm.sample_increments(bm.DyadicGrid(1.0, level), seed, paths)
    try:
        check = kc_bounds.kc_inequality_check(ens, p, q, M, beta, c, d, diam)
        m_hat = kc_bounds.kolmogorov_condition_estimate(ens, p, q)
    except BrownianLabError as exc:
        raise ConfigError(str(exc)) from exc
    config = {"input": input_path or "", "level": level, "paths": ens.count, "seed": seed,
              "p": p, "q": q, "M": M, "beta": beta, "c": c, "d": d,
              "L": check.L, "M_hat": m_hat}
    _finish(SuiteReport("kc_check", config, [check.to_report(seed)]), out)


# ---------------------------------------------------------------------------
# cover


@main.command("cover")
@click.option("--points", "points_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV of point coordinates (Euclidean distance).")
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV distance matrix; 'inf' for infinite entries.")
@click.option("--eps", "eps_list", required=True, help="Comma-separated radii.")
@click.option("--seed", type=int, default=0, help="Accepted for uniformity; unused.")
@click.option("--format", "fmt", type=click.Choice(["text", "csv", "json"]), default="text", show_default=True)
def cover_cmd(points_path, matrix_path, eps_list, seed, fmt):
    """Covering and packing numbers for each radius."""
    if (points_path is None) == (matrix_path is None):
        raise click.UsageError("give exactly one of --points or --matrix")
    try:
        with open(points_path or matrix_path, encoding="utf-8") as fh:
            text = fh.read()
        space = (metric_cover.loads_points_csv if points_path else metric_cover.loads_distance_csv)(text)
        radii = _floats(eps_list)
        rows = []
        for e in radii:
            greedy = len(metric_cover.greedy_cover(space, e).centers)
            exact = space.size <= metric_cover.EXACT_CAP
            rows.append({
                "eps": e,
                "greedy": greedy,
                "N": metric_cover.minimal_cover_number(space, e) if exact else None,
                "P_eps": metric_cover.packing_number(space, e) if exact else None,
                "P_2eps": metric_cover.packing_number(space, 2 * e) if exact else None,
            })
    except (BrownianLabError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if fmt == "json":
        click.echo(json.dumps({"size": space.size, "rows": rows, "version": __version__}))
        return
    sep = "," if fmt == "csv" else "\t"
    cols = ["eps", "greedy", "N", "P_eps", "P_2eps"]
    click.echo(sep.join(cols))
    for r in rows:
        click.echo(sep.join("" if r[k] is None else str(r[k]) for k in cols))


# ---------------------------------------------------------------------------
# sets


@main.group("sets")
def sets_group():
    """Finite-universe extension theory."""


def _parse_points(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


@sets_group.command("demo")
@click.option("--file", "family_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Family file ('universe n' / 'set <bits> <value>'); bundled dyadic example if omitted.")
@click.option("--query", multiple=True, default=("1,2",), show_default=True,
              help="Comma-separated points whose outer measure is printed.")
@click.option("--seed", type=int, default=0, help="Accepted for uniformity; unused.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def sets_demo(family_path, query, seed, fmt):
    """Run the Caratheodory extension check and print outer measures."""
    try:
        if family_path:
            with open(family_path, encoding="utf-8") as fh:
                family, content = setsystems.loads_family(fh.read())
        else:
            family, content = setsystems.bundled_dyadic()
        report = setsystems.verify_extension(family, content)
        queries = [(q, report.outer[setsystems.mask_of(_parse_points(q))]) for q in query]
    except (BrownianLabError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    n = family.universe.size
    cara_full = len(report.caratheodory) == 2**n
    if fmt == "json":
        click.echo(json.dumps({
            "pass": report.passed,
            "caratheodory_sets": len(report.caratheodory),
            "power_set": cara_full,
            "residuals": {setsystems.format_mask(m, n): str(r) for m, r in report.residuals.items()},
            "outer": {q: str(v) for q, v in queries},
            "version": __version__,
        }))
    else:
        click.echo(f"extension check: {'pass' if report.passed else 'FAIL'}")
        click.echo(f"Caratheodory sets: {len(report.caratheodory)} of {2**n}")
        for m, r in report.residuals.items():
            click.echo(f"  residual {setsystems.format_mask(m, n)}: {r}")
        for q, v in queries:
            click.echo(f"mu({{{q}}}) = {v}")
    sys.exit(0 if report.passed else 1)


# ---------------------------------------------------------------------------
# gauss


@main.group("gauss")
def gauss_group():
    """Finite-dimensional Gaussian measures."""


def _matrix(text):
    return np.array([[float(Fraction(v)) for v in row.split(",")] for row in text.split(";")])


@gauss_group.command("charfun")
@click.option("--mean", default=None, help="Comma-separated mean (zeros if omitted).")
@click.option("--cov", required=True, help="Rows separated by ';', entries by ','.")
@click.option("--probe", "probes", multiple=True, required=True, help="Comma-separated probe vector.")
@click.option("--seed", type=int, default=0, help="Accepted for uniformity; unused.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def gauss_charfun(mean, cov, probes, seed, fmt):
    """Evaluate the characteristic function at each probe."""
    try:
        C = _matrix(cov)
        m = np.zeros(C.shape[0]) if mean is None else np.array(_floats(mean))
        g = gaussian.GaussianMeasure(m, C)
        rows = []
        for pr in probes:
            t = np.array(_floats(pr))
            v = gaussian.charfun(g, t)
            rows.append((pr, v))
    except (BrownianLabError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if fmt == "json":
        click.echo(json.dumps({
            "rows": [{"probe": pr, "re": v.real, "im": v.imag, "abs": abs(v)} for pr, v in rows],
            "version": __version__,
        }))
        return
    click.echo("probe\tre\tim\tabs")
    for pr, v in rows:
        click.echo(f"{pr}\t{v.real!r}\t{v.imag!r}\t{abs(v)!r}")


if __name__ == "__main__":  # pragma: no cover
    main()
