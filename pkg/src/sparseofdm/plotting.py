"""Static SVG rendering of sweep results."""
from collections import defaultdict

from .harness import read_csv


def plot_csv(in_path, out_path, metric="ber_coded"):
    """One line per (estimator, Doppler) of ``metric`` against SNR, log scale."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    curves = defaultdict(list)
    for m in read_csv(in_path):
        curves[(m.estimator, m.doppler_hz)].append((m.snr_db, getattr(m, metric)))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (est, fd), pts in sorted(curves.items()):
        pts = sorted(p for p in pts if p[1] > 0)  # zeros have no log-scale position
        if not pts:
            continue
        x, y = zip(*pts)
        ax.semilogy(x, y, marker="o", label=f"{est}, fd={fd:g} Hz")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel(metric)
    ax.grid(True, which="both", alpha=0.3)
    if curves:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
