"""Figures for single runs and mode comparisons (rendered off-screen to PNG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

MODE_STYLE = {
    "continuous": dict(color="black", lw=1.2, label="continuous U(t)"),
    "cetc": dict(color="tab:blue", lw=1.0, label="CETC held input"),
    "petc": dict(color="tab:red", lw=1.0, ls="--", label="PETC held input"),
}


def plot_run(result, out_dir, name="run.png"):
    s = result.series
    t = s["t_s"]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    ax = axes[0, 0]
    ax.plot(t, s["l_m"] * 1e6, color="tab:green")
    ax.axhline(result.config.physical.l_s * 1e6, color="gray", ls=":")
    ax.set(xlabel="t [s]", ylabel="l [um]", title="axon length")
    ax = axes[0, 1]
    ax.plot(t, s["c_c_mol_m3"], color="tab:purple")
    ax.axhline(result.config.physical.c_inf, color="gray", ls=":")
    ax.set(xlabel="t [s]", ylabel="c_c [mol/m^3]", title="growth-cone concentration")
    ax = axes[1, 0]
    ax.semilogy(t, np.maximum(s["err_l2_u"], 1e-16), color="tab:orange")
    ax.set(xlabel="t [s]", ylabel="relative L2 error", title="profile error")
    ax = axes[1, 1]
    ax.semilogy(t, np.maximum(-s["m"], 1e-300), color="tab:brown")
    ax.set(xlabel="t [s]", ylabel="-m", title="dynamic trigger variable")
    fig.suptitle(f"mode: {result.mode}")
    fig.tight_layout()
    path = Path(out_dir) / name
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_inputs(results, out_dir, window=1.0, name="inputs.png"):
    """Continuous law against the held inputs over the first ``window`` seconds."""
    fig, ax = plt.subplots(figsize=(9, 5))
    for res in results:
        s = res.series
        keep = s["t_s"] <= window
        style = MODE_STYLE.get(res.mode, {})
        if res.mode == "continuous":
            ax.plot(s["t_s"][keep], s["U_continuous"][keep], **style)
        else:
            ax.step(s["t_s"][keep], s["U_applied"][keep], where="post", **style)
    ax.set(xlabel="t [s]", ylabel="U", title="control input")
    ax.legend()
    fig.tight_layout()
    path = Path(out_dir) / name
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_lengths(results, out_dir, name="lengths.png"):
    fig, ax = plt.subplots(figsize=(9, 5))
    for res in results:
        style = dict(MODE_STYLE.get(res.mode, {}))
        style["label"] = res.mode
        ax.plot(res.series["t_s"], res.series["l_m"] * 1e6, **style)
    if results:
        ax.axhline(results[0].config.physical.l_s * 1e6, color="gray", ls=":")
    ax.set(xlabel="t [s]", ylabel="l [um]", title="axon length")
    ax.legend()
    fig.tight_layout()
    path = Path(out_dir) / name
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
