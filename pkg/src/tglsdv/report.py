"""Coefficient tables, fixed-effect summaries and the time-varying dummy
path as text, CSV and SVG."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np
from scipy import stats

from .errors import VariantMismatchError
from .estimator import FitResult

Z95 = float(stats.norm.ppf(0.975))


def stars(p: float) -> str:
    if not np.isfinite(p):
        return ""
    if p <= 0.001:
        return "***"
    if p <= 0.01:
        return "**"
    if p <= 0.05:
        return "*"
    return ""


def pvalue(est: float, se: float) -> float:
    if not se > 0:
        return float("nan")
    return float(2.0 * stats.norm.sf(abs(est / se)))


def format_row(name: str, est: float, se: float) -> str:
    return f"{name} {est:.4f}{stars(pvalue(est, se))} ({se:.4f})"


def render_coefficient_table(fit: FitResult, style: str = "text", names=None) -> str:
    """Estimates with standard errors in parentheses and significance stars
    (``*`` p <= 0.05, ``**`` p <= 0.01, ``***`` p <= 0.001, two-sided normal)."""
    names = list(fit.names if names is None else names)
    se = fit.se
    rows = [(k, float(fit.coef[fit.names.index(k)]), float(se[fit.names.index(k)]))
            for k in names]
    if style == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "estimate", "se", "p", "stars"])
        for k, b, s in rows:
            p = pvalue(b, s)
            w.writerow([k, repr(b), repr(s), repr(p), stars(p)])
        return buf.getvalue()
    if style != "text":
        raise ValueError(f"unknown style {style!r}")
    lines = [f"model={fit.model} lag={fit.lag} N={fit.n_obs} k={fit.k_params} "
             f"RSS={fit.rss:.6g} BIC={fit.bic:.6g}"]
    lines += [format_row(k, b, s) for k, b, s in rows]
    totals = fit.extras.get("totals")
    if totals:
        lines.append("SSH totals (base + interaction)")
        lines += [format_row(f"total {k}", b, s) for k, (b, s) in totals.items()]
    knots = fit.extras.get("knots")
    if knots:
        lines.append("interior knots: " + ", ".join(f"{k}={v}" for k, v in knots.items()))
    lines.append("* p <= 0.05  ** p <= 0.01  *** p <= 0.001")
    return "\n".join(lines) + "\n"


def parse_coefficient_csv(text: str) -> list[dict]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append({"name": row["name"], "estimate": float(row["estimate"]),
                    "se": float(row["se"]), "p": float(row["p"]), "stars": row["stars"]})
    return out


def _box(values, labels):
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo) & (v <= hi)]
    return {
        "count": int(v.size),
        "min": float(v.min()), "q1": float(q1), "median": float(med),
        "q3": float(q3), "max": float(v.max()),
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": [[labels[i], float(v[i])] for i in np.flatnonzero((v < lo) | (v > hi))],
    }


def fixed_effects_summary(fit: FitResult) -> dict:
    """Boxplot statistics of the country effects.

    ``fixed`` is ``eta_tilde + eta_g + SSH 1_SSH`` and ``corrected`` drops the
    group dummy, ``eta_tilde + eta_g``. Each variant is summarised over all
    countries and per group.
    """
    if fit.model == "timevary":
        raise VariantMismatchError("fixed-effect summary needs a static SSH dummy")
    ssh = np.asarray(fit.ssh, bool)
    corrected = fit.eta_tilde_hat + fit.eta_g_hat
    fixed = corrected + fit.ssh_hat * ssh
    labels = list(fit.countries)
    out = {"values": {"fixed": dict(zip(labels, fixed.tolist())),
                      "corrected": dict(zip(labels, corrected.tolist()))}}
    for name, vals in (("fixed", fixed), ("corrected", corrected)):
        out[name] = {
            "all": _box(vals, labels),
            "SSH": _box(vals[ssh], [c for c, f in zip(labels, ssh) if f]),
            "non-SSH": _box(vals[~ssh], [c for c, f in zip(labels, ssh) if not f]),
        }
    return out


@dataclass(frozen=True)
class DummyPath:
    years: np.ndarray
    estimate: np.ndarray
    se: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray

    @property
    def insignificant(self) -> np.ndarray:
        return (self.ci_low <= 0.0) & (self.ci_high >= 0.0)


def dummy_path(fit: FitResult) -> DummyPath:
    """SSH dummy per period with pointwise 95% normal bands."""
    if fit.model != "timevary":
        raise VariantMismatchError(f"dummy path needs a time-varying fit, got {fit.model!r}")
    idx = [fit.names.index(f"SSH {y}") for y in fit.years]
    est = fit.coef[idx]
    se = fit.se[idx]
    return DummyPath(np.array(fit.years), est, se, est - Z95 * se, est + Z95 * se)


def emit_dummy_path(fit: FitResult, format: str = "csv") -> str:
    path = dummy_path(fit)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["year", "estimate", "se", "ci_low", "ci_high", "insignificant"])
        for i, y in enumerate(path.years):
            w.writerow([int(y), repr(float(path.estimate[i])), repr(float(path.se[i])),
                        repr(float(path.ci_low[i])), repr(float(path.ci_high[i])),
                        int(path.insignificant[i])])
        return buf.getvalue()
    if format == "svg":
        return _svg(path, f"SSH dummy by year (lag {fit.lag})")
    raise ValueError(f"unknown format {format!r}")


def _svg(path: DummyPath, title: str, width=640, height=360, pad=50) -> str:
    x0, x1 = float(path.years[0]), float(path.years[-1])
    if x1 == x0:
        x1 = x0 + 1
    lo = min(float(path.ci_low.min()), 0.0)
    hi = max(float(path.ci_high.max()), 0.0)
    if hi == lo:
        hi = lo + 1
    span = hi - lo
    lo, hi = lo - 0.05 * span, hi + 0.05 * span

    def px(year):
        return pad + (year - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    def pts(xs, ys):
        return " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, ys))

    yrs = path.years.astype(float)
    band = pts(np.r_[yrs, yrs[::-1]], np.r_[path.ci_high, path.ci_low[::-1]])
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>',
        f'<line x1="{pad}" y1="{py(0):.2f}" x2="{width - pad}" y2="{py(0):.2f}" '
        'stroke="black" stroke-dasharray="4 3"/>',
        f'<polyline points="{pts(yrs, path.estimate)}" fill="none" stroke="#08519c" '
        'stroke-width="2"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for year in path.years[:: max(1, len(path.years) // 8)]:
        parts.append(f'<text x="{px(float(year)):.2f}" y="{height - pad + 16}" '
                     f'font-size="11" text-anchor="middle">{int(year)}</text>')
    for v in np.linspace(lo, hi, 5):
        parts.append(f'<text x="{pad - 6}" y="{py(v) + 4:.2f}" font-size="11" '
                     f'text-anchor="end">{v:.3f}</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{pad / 2:.0f}" font-size="13" '
                 f'text-anchor="middle">{escape(title)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
