"""Figure rendering from mmwsched campaign CSVs.

Batch only: each figure is computed from one or more aggregate CSVs and
written to an image file.  Input files are never modified, and the data
series behind a figure are a pure function of the inputs; image bytes may
differ across matplotlib versions but the plotted numbers do not.
"""

from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

SUPPORTED_SCHEMA = (1,)


class FigureError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple
    x: str
    y: str = "gm_bar"
    series_by: tuple = ("rf_per_stream_bs", "rf_per_stream_ue")
    baseline: dict | None = None          # improvement panels: selects one series
    output: str = "figure.png"
    kind: str = "curves"                  # curves | improvement | overlay
    y2: str = "gmr_bar"                   # overlay upper-bound column
    title: str = ""
    ylabel: str = ""


def load_rows(csv_paths) -> pd.DataFrame:
    """Concatenate aggregate CSVs, checking the schema version."""
    frames = []
    for path in csv_paths:
        df = pd.read_csv(path)
        if "schema_version" not in df.columns:
            raise FigureError(f"{path}: missing schema_version column")
        bad = set(df["schema_version"].unique()) - set(SUPPORTED_SCHEMA)
        if bad:
            raise FigureError(f"{path}: unsupported schema version(s) {sorted(bad)}")
        frames.append(df)
    merged = pd.concat(frames, ignore_index=True)
    if "status" in merged.columns:
        merged = merged[merged["status"] == "ok"]
    return merged


def _check_columns(df: pd.DataFrame, columns) -> None:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise FigureError(f"columns not in CSV header: {missing}")


def _series_key(values) -> str:
    return ", ".join(f"{name}={value}" for name, value in values)


def series_table(df: pd.DataFrame, x: str, y: str, series_by) -> dict:
    """{series label: (x array, y array)} sorted by x, one point per x."""
    _check_columns(df, [x, y, *series_by])
    out = {}
    grouped = df.groupby(list(series_by), sort=True) if series_by else [((), df)]
    for key, sub in grouped:
        if not isinstance(key, tuple):
            key = (key,)
        sub = sub.sort_values(x)
        if sub[x].duplicated().any():
            raise FigureError(f"duplicate {x} values within one series {key}")
        label = _series_key(zip(series_by, key))
        out[label] = (sub[x].to_numpy(), sub[y].to_numpy(dtype=float))
    return out


def improvement_series(df: pd.DataFrame, x: str, y: str, series_by,
                       baseline: dict) -> dict:
    """Percentage improvement of every series over the baseline series,
    aligned on x: 100 * (y - y_base) / y_base."""
    if not baseline:
        raise FigureError("improvement panel needs a baseline selector")
    _check_columns(df, [x, y, *series_by, *baseline])
    mask = pd.Series(True, index=df.index)
    for col, val in baseline.items():
        mask &= df[col] == val
    base_df = df[mask]
    base_groups = set(map(tuple, base_df[list(series_by)].drop_duplicates().to_numpy()))
    if len(base_groups) != 1:
        raise FigureError(
            f"baseline selector {baseline} matches {len(base_groups)} series, expected 1")
    base = base_df.sort_values(x)
    base_x = base[x].to_numpy()
    base_y = base[y].to_numpy(dtype=float)
    base_map = dict(zip(base_x, base_y))

    out = {}
    for label, (xs, ys) in series_table(df, x, y, series_by).items():
        missing = [v for v in xs if v not in base_map]
        if missing:
            raise FigureError(f"baseline has no rows at {x}={missing}")
        ref = pd.Series(xs).map(base_map).to_numpy(dtype=float)
        out[label] = (xs, 100.0 * (ys - ref) / ref)
    return out


def render(spec: FigureSpec) -> str:
    """Render the figure described by ``spec``; returns the output path."""
    df = load_rows(spec.csv_paths)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if spec.kind == "curves":
        for label, (xs, ys) in series_table(df, spec.x, spec.y, spec.series_by).items():
            ax.plot(xs, ys, marker="o", label=label or spec.y)
        ax.set_ylabel(spec.ylabel or spec.y)
    elif spec.kind == "improvement":
        for label, (xs, ys) in improvement_series(df, spec.x, spec.y, spec.series_by,
                                                  spec.baseline).items():
            ax.plot(xs, ys, marker="s", label=label)
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_ylabel(spec.ylabel or f"{spec.y} improvement over baseline (%)")
    elif spec.kind == "overlay":
        _check_columns(df, [spec.y, spec.y2])
        feasible = series_table(df, spec.x, spec.y, spec.series_by)
        upper = series_table(df, spec.x, spec.y2, spec.series_by)
        for label in feasible:
            xs, ys = feasible[label]
            ax.plot(xs, ys, marker="o", label=f"feasible {label}".strip())
            ax.plot(*upper[label], marker="^", linestyle="--",
                    label=f"upper bound {label}".strip())
        ax.set_ylabel(spec.ylabel or spec.y)
    else:
        raise FigureError(f"unknown figure kind {spec.kind!r}")
    ax.set_xlabel(spec.x)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return spec.output
