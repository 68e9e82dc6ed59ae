"""Shared plotting helper: matplotlib when installed, bare SVG otherwise."""
from pathlib import Path

from nhdecay import io

OUT = Path(__file__).resolve().parent / "output"


def line_plot(name, series, *, title="", xlabel="t", ylabel="", hlines=(), logy=False):
    OUT.mkdir(exist_ok=True)
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        path = io.write_svg(OUT / f"{name}.svg", series, title=title, xlabel=xlabel, ylabel=ylabel, hlines=hlines)
        print(f"wrote {path} (matplotlib not installed)")
        return path
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for x, y, label in series:
        ax.plot(x, y, label=label)
    for h, label in hlines:
        ax.axhline(h, ls="--", c="gray", label=label)
    if logy:
        ax.set_yscale("log")
    ax.set(title=title, xlabel=xlabel, ylabel=ylabel)
    ax.legend()
    fig.tight_layout()
    path = OUT / f"{name}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print(f"wrote {path}")
    return path
