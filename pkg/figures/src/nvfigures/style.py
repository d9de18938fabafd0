"""All styling constants of the figure renderer live here."""

# engine -> (line style, marker); analytic curves are solid, exact numerics
# dashed, stochastic/fitted engines are point estimates drawn as markers
ENGINE_STYLES = {
    "analytic": {"linestyle": "-", "marker": ""},
    "numeric": {"linestyle": "--", "marker": ""},
    "oracle": {"linestyle": "", "marker": "o"},
    "dynamics": {"linestyle": "", "marker": "s"},
}

ENGINE_LABELS = {
    "analytic": "analytic",
    "numeric": "Markov numeric",
    "oracle": "Monte Carlo oracle",
    "dynamics": "exact dynamics",
}

# one color per plotted quantity, shared across engines so that line style
# alone distinguishes the engines
QUANTITY_COLORS = {
    "inv_T2": "#1f77b4",
    "inv_T1": "#d62728",
    "gamma_phi": "#1f77b4",
    "gamma_relax": "#d62728",
    "gamma_phi_0": "#2ca02c",
    "gamma_phi_1": "#9467bd",
    "gamma_pm_0": "#2ca02c",
    "gamma_pm_1": "#9467bd",
}

QUANTITY_LABELS = {
    "inv_T2": r"$1/T_2$ ($\mu$s$^{-1}$)",
    "inv_T1": r"$1/T_1$ ($\mu$s$^{-1}$)",
    "gamma_phi": r"$\Gamma_\varphi$ ($\mu$s$^{-1}$)",
    "gamma_relax": r"$\Gamma_+ + \Gamma_-$ ($\mu$s$^{-1}$)",
    "gamma_phi_0": r"$\Gamma_\varphi^{(0)}$",
    "gamma_phi_1": r"$\Gamma_\varphi^{(1)}$",
    "gamma_pm_0": r"$\Gamma_\pm^{(0)}$ sum",
    "gamma_pm_1": r"$\Gamma_\pm^{(1)}$ sum",
}

AXIS_LABELS = {
    "R": r"pumping rate $R$ ($\mu$s$^{-1}$)",
    "B_z": r"$B_z$ (mT)",
    "B_y": r"$B_y$ (mT)",
    "eta": r"coupling scale $1/\eta$",
}

FIGSIZE_PER_PANEL = (4.2, 3.2)
DPI = 150
ERRORBAR_CAPSIZE = 2.5
LINEWIDTH = 1.4
MARKERSIZE = 5.0
GRID_KWARGS = {"alpha": 0.3, "linewidth": 0.5}
LEGEND_FONTSIZE = 8

# PNG text chunks that would break byte-level reproducibility are suppressed
DETERMINISTIC_METADATA = {"Software": None}
