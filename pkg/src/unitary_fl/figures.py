"""Report rendering: delimited summaries plus matplotlib figures.

Figures and CSV files land next to each other in the requested output
directory; the canonical JSON on stdout stays untouched, so the
figures are free to carry timing and layout that the byte-stable
reports must not.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _ensure(outdir: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    return outdir


def write_corpus_outputs(outdir: str, results: list) -> None:
    """results: (name, flverify payload, seconds) triples."""
    _ensure(outdir)
    with open(os.path.join(outdir, "corpus_summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance", "q", "n", "r", "O_kappa", "SO_H", "transfer",
                    "verdict", "seconds"])
        for name, payload, seconds in results:
            w.writerow([name, payload["q"], payload["n"], payload["r"],
                        payload["O_kappa"], payload["SO_H"], payload["transfer"],
                        payload["verdict"], f"{seconds:.3f}"])
    _corpus_figure(outdir, results)
    for name, payload, _ in results:
        _class_count_figure(os.path.join(outdir, f"counts_{name}.png"),
                            payload, title=name)


def write_flverify_outputs(outdir: str, inst, payload: dict) -> None:
    _ensure(outdir)
    tag = payload["datum_hash"]
    with open(os.path.join(outdir, f"flverify_{tag}.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["datum_hash", "q", "n", "r", "O_kappa", "SO_H", "transfer", "verdict"])
        w.writerow([tag, payload["q"], payload["n"], payload["r"],
                    payload["O_kappa"], payload["SO_H"], payload["transfer"],
                    payload["verdict"]])
    _class_count_figure(os.path.join(outdir, f"classes_{tag}.png"), payload,
                        title=f"instance {tag}")


def _corpus_figure(outdir: str, results: list) -> None:
    names = [name for name, _, _ in results]
    okappa = [int(payload["O_kappa"]) for _, payload, _ in results]
    rhs = [int(payload["transfer"]) * int(payload["SO_H"]) for _, payload, _ in results]
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(max(6, 1.3 * len(names)), 4))
    ax.bar([i - 0.2 for i in x], okappa, width=0.4, label="signed count sum")
    ax.bar([i + 0.2 for i in x], rhs, width=0.4, label="transfer x stable sum")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_ylabel("value")
    ax.set_title("endoscopic identity, both sides per instance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(outdir, "corpus_summary.png"), dpi=150)
    plt.close(fig)


def _class_count_figure(path: str, payload: dict, title: str) -> None:
    classes = payload["classes"]
    labels = sorted(classes)
    counts = [int(classes[k]) for k in labels]
    fig, ax = plt.subplots(figsize=(max(4, 0.9 * len(labels) + 2), 3.2))
    ax.bar(range(len(labels)), counts, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([f"({k})" for k in labels])
    ax.set_ylabel("self-dual stable lattices")
    ax.set_xlabel("discriminant class")
    ax.set_title(title)
    for i, c in enumerate(counts):
        ax.text(i, c, str(c), ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
