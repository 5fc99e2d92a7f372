"""Figure rendering for the experiment commands.

Each command gets one PNG next to its CSV.  Figures are a convenience view
of the delimited output; the CSV stays the canonical artifact.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .experiments import CommandResult  # noqa: E402


def _col(result: CommandResult, name: str) -> list:
    idx = result.header.index(name)
    return [row[idx] for row in result.rows]


def _plot_verify_identity(result: CommandResult, ax) -> None:
    expected = _col(result, "expected")
    norm = _col(result, "norm")
    lo, hi = min(expected), max(expected)
    ax.plot([lo, hi], [lo, hi], "k-", alpha=0.4, lw=1)
    ax.plot(expected, norm, "o", ms=5)
    ax.set_xlabel("second family size / n")
    ax.set_ylabel("exact operator norm")
    ax.set_title("second-moment identity")


def _plot_scaling(result: CommandResult, fig) -> None:
    d = _col(result, "d")
    norm = _col(result, "norm")
    ratio = _col(result, "ratio")
    ax1, ax2 = fig.subplots(1, 2)
    ax1.loglog(d, norm, "o-")
    ax1.set_xlabel("d")
    ax1.set_ylabel("operator norm of E[M]")
    ax1.set_title("norm vs dimension")
    ax2.plot(d, ratio, "o-")
    ax2.set_xlabel("d")
    ax2.set_ylabel("norm / reference scale")
    ax2.set_title("scaled ratio")
    ax2.set_ylim(bottom=0)


def _plot_counting(result: CommandResult, ax) -> None:
    count = [c + 1 for c in _col(result, "count")]
    bound = [b + 1 for b in _col(result, "bound")]
    hi = max(bound)
    ax.loglog([1, hi], [1, hi], "k-", alpha=0.4, lw=1)
    ax.loglog(bound, count, ".", ms=3, alpha=0.5)
    ax.set_xlabel("bound + 1")
    ax.set_ylabel("count + 1")
    ax.set_title("counts vs closed-form bounds")


def _plot_mc_vs_exact(result: CommandResult, ax) -> None:
    z = [v for v in _col(result, "z") if v == v and v != float("inf")]
    ax.hist(z, bins=20)
    ax.axvline(4.0, color="r", ls="--", lw=1, label="4 stderr")
    ax.set_xlabel("|exact - mc| / stderr")
    ax.set_ylabel("entries")
    ax.set_title("Monte Carlo vs exact")
    ax.legend()


def _plot_weighted_sums(result: CommandResult, ax) -> None:
    shapes = sorted(set(_col(result, "shape")))
    d = _col(result, "d")
    ratio = _col(result, "ratio")
    shape_col = _col(result, "shape")
    for shape in shapes:
        xs = [dd for dd, s in zip(d, shape_col) if s == shape]
        ys = [r for r, s in zip(ratio, shape_col) if s == shape]
        ax.plot(xs, ys, "o-", label=shape)
    ax.set_xlabel("d")
    ax.set_ylabel("sum / scale")
    ax.set_title("weighted monomial sums")
    ax.legend()


def render_figures(result: CommandResult, out_dir: str | Path) -> list[str]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{result.command}.png"
    if result.command == "scaling-sweep":
        fig = plt.figure(figsize=(9, 4))
        _plot_scaling(result, fig)
    else:
        fig, ax = plt.subplots(figsize=(5.5, 4.2))
        {
            "verify-identity": _plot_verify_identity,
            "counting-bounds": _plot_counting,
            "mc-vs-exact": _plot_mc_vs_exact,
            "weighted-sums": _plot_weighted_sums,
        }[result.command](result, ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [str(path)]
