"""Balanced country-year panels with a two-group membership label."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BalancedPanelError,
    DegenerateGroupError,
    DuplicateRowError,
    UnknownCountryError,
    YearGapError,
)

ROLES = ("country", "year", "y", "n", "sk", "attain")
_MISSING = {"", "na", "nan", "."}
_MAGIC = "# tglsdv-panel v1"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Panel:
    """Balanced panel.

    ``series[name]`` is an ``(n, T)`` array aligned with ``countries`` and
    ``years``. ``sparse[name]`` holds variables observed only on a common
    subset of years (five-yearly attainment) as ``(obs_years, (n, m) array)``.
    When ``s > 0`` the first ``s`` countries form the SSH group.
    """

    countries: tuple
    years: tuple
    series: dict
    ssh: np.ndarray
    sparse: dict = field(default_factory=dict)

    def __post_init__(self):
        years = tuple(int(y) for y in self.years)
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "years", years)
        if any(b - a != 1 for a, b in zip(years, years[1:])):
            raise YearGapError(f"years are not contiguous: {years}")
        n, T = len(self.countries), len(years)
        series = {}
        for name, mat in self.series.items():
            mat = _frozen(mat)
            if mat.shape != (n, T):
                raise ValueError(f"series {name!r} has shape {mat.shape}, expected {(n, T)}")
            _check_balanced(mat, self.countries, years, name)
            series[name] = mat
        sparse = {}
        for name, (obs, mat) in self.sparse.items():
            obs = tuple(int(y) for y in obs)
            mat = _frozen(mat)
            if mat.shape != (n, len(obs)):
                raise ValueError(f"sparse series {name!r} has shape {mat.shape}")
            _check_balanced(mat, self.countries, obs, name)
            sparse[name] = (obs, mat)
        ssh = np.array(self.ssh, dtype=bool)
        if ssh.shape != (n,):
            raise ValueError("ssh flags must have one entry per country")
        s = int(ssh.sum())
        if not ssh[:s].all():
            raise ValueError("SSH countries must be stored first")
        ssh.flags.writeable = False
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "sparse", sparse)
        object.__setattr__(self, "ssh", ssh)

    @property
    def n(self) -> int:
        return len(self.countries)

    @property
    def T(self) -> int:
        return len(self.years)

    @property
    def s(self) -> int:
        return int(self.ssh.sum())

    def group(self, country) -> str:
        return "SSH" if self.ssh[self.countries.index(country)] else "non-SSH"

    def with_series(self, series: dict, sparse: dict | None = None) -> "Panel":
        return Panel(self.countries, self.years, series, self.ssh,
                     self.sparse if sparse is None else sparse)

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        if (self.countries, self.years) != (other.countries, other.years):
            return False
        if not np.array_equal(self.ssh, other.ssh):
            return False
        if self.series.keys() != other.series.keys() or self.sparse.keys() != other.sparse.keys():
            return False
        if any(not np.array_equal(v, other.series[k]) for k, v in self.series.items()):
            return False
        return all(o == other.sparse[k][0] and np.array_equal(m, other.sparse[k][1])
                   for k, (o, m) in self.sparse.items())


def _check_balanced(mat, countries, years, name):
    bad = np.argwhere(~np.isfinite(mat))
    if bad.size:
        i, t = bad[0]
        raise BalancedPanelError(countries[i], years[t], name)


def load_panel(path, schema: dict) -> Panel:
    """Read a delimited text file into a :class:`Panel`.

    ``schema`` maps the roles ``country, year, y, n, sk, attain`` to column
    names. Optional keys: ``delimiter`` (default ``","``), ``sparse`` (roles
    observed on a common year subset, e.g. ``["attain"]``) and ``extra``
    (additional columns to carry along under their own names).
    """
    missing_roles = [r for r in ROLES if r not in schema]
    if missing_roles:
        raise ValueError(f"schema lacks roles: {missing_roles}")
    delimiter = schema.get("delimiter", ",")
    sparse_roles = set(schema.get("sparse", ()))
    variables = [r for r in ROLES[2:]] + list(schema.get("extra", ()))
    colname = {r: schema.get(r, r) for r in ROLES}
    colname.update({v: v for v in schema.get("extra", ())})

    cells = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        absent = [colname[r] for r in list(ROLES) + list(schema.get("extra", ()))
                  if colname[r] not in (reader.fieldnames or ())]
        if absent:
            raise ValueError(f"columns not found in {path}: {absent}")
        for row in reader:
            key = (row[colname["country"]].strip(), int(float(row[colname["year"]])))
            if key in cells:
                raise DuplicateRowError(*key)
            cells[key] = {v: _parse(row[colname[v]]) for v in variables}

    countries = sorted({c for c, _ in cells})
    all_years = sorted({y for _, y in cells})
    years = list(range(all_years[0], all_years[-1] + 1))
    if years != all_years:
        gaps = sorted(set(years) - set(all_years))
        raise YearGapError(f"no rows for years {gaps}")

    series, sparse = {}, {}
    for v in variables:
        if v in sparse_roles:
            obs = [y for y in years if any(np.isfinite(cells.get((c, y), {}).get(v, np.nan))
                                           for c in countries)]
        else:
            obs = years
        mat = np.empty((len(countries), len(obs)))
        for i, c in enumerate(countries):
            for t, y in enumerate(obs):
                rec = cells.get((c, y))
                if rec is None or not np.isfinite(rec[v]):
                    raise BalancedPanelError(c, y, v)
                mat[i, t] = rec[v]
        if v in sparse_roles:
            sparse[v] = (obs, mat)
        else:
            series[v] = mat
    return Panel(countries, years, series, np.zeros(len(countries), bool), sparse)


def _parse(text):
    text = (text or "").strip()
    if text.lower() in _MISSING:
        return np.nan
    return float(text)


def assign_groups(panel: Panel, membership) -> Panel:
    """Mark ``membership`` as the SSH group and move it to the front."""
    membership = list(dict.fromkeys(str(c).strip() for c in membership))
    unknown = [c for c in membership if c not in panel.countries]
    if unknown:
        raise UnknownCountryError(f"not in panel: {unknown}")
    s = len(membership)
    if s == 0 or s == panel.n:
        raise DegenerateGroupError(
            f"group of size {s} out of {panel.n} leaves the dummy unidentified")
    members = set(membership)
    order = ([i for i, c in enumerate(panel.countries) if c in members]
             + [i for i, c in enumerate(panel.countries) if c not in members])
    flags = np.arange(panel.n) < s
    return Panel(
        [panel.countries[i] for i in order],
        panel.years,
        {k: v[order] for k, v in panel.series.items()},
        flags,
        {k: (o, m[order]) for k, (o, m) in panel.sparse.items()},
    )


def read_codes(path) -> list[str]:
    """Country codes, one per line; ``#`` starts a comment."""
    codes = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            codes.extend(tok for tok in line.replace(",", " ").split() if tok)
    return codes


def dumps_panel(panel: Panel, kind: str = "panel") -> str:
    buf = io.StringIO()
    names = list(panel.series)
    sp = list(panel.sparse)
    buf.write(f"{_MAGIC}\n")
    buf.write(f"# kind={kind}\n")
    buf.write(f"# n={panel.n}\n# T={panel.T}\n# s={panel.s}\n")
    buf.write(f"# years={panel.years[0]}-{panel.years[-1]}\n")
    buf.write(f"# variables={','.join(names)}\n")
    for name in sp:
        obs = panel.sparse[name][0]
        buf.write(f"# sparse={name}@{';'.join(map(str, obs))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["country", "year", "ssh"] + names + sp)
    sp_pos = {name: {y: k for k, y in enumerate(panel.sparse[name][0])} for name in sp}
    for i, c in enumerate(panel.countries):
        for t, y in enumerate(panel.years):
            row = [c, y, int(panel.ssh[i])]
            row += [repr(float(panel.series[v][i, t])) for v in names]
            for name in sp:
                k = sp_pos[name].get(y)
                row.append("" if k is None else repr(float(panel.sparse[name][1][i, k])))
            w.writerow(row)
    return buf.getvalue()


def write_panel(panel: Panel, path, kind: str = "panel") -> None:
    Path(path).write_text(dumps_panel(panel, kind), encoding="utf-8")


def read_panel(path) -> Panel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise ValueError(f"{path} is not a panel file")
    header, body = {}, []
    sparse_obs = {}
    for line in lines[1:]:
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            if key == "sparse":
                name, _, obs = val.partition("@")
                sparse_obs[name] = [int(y) for y in obs.split(";") if y]
            else:
                header[key] = val
        else:
            body.append(line)
    names = [v for v in header.get("variables", "").split(",") if v]
    n, T = int(header["n"]), int(header["T"])
    y0, y1 = (int(v) for v in header["years"].split("-"))
    years = list(range(y0, y1 + 1))
    rows = list(csv.reader(body))[1:]
    if len(rows) != n * T:
        raise ValueError(f"expected {n * T} rows, found {len(rows)}")
    countries = [rows[i * T][0] for i in range(n)]
    ssh = np.array([rows[i * T][2] == "1" for i in range(n)])
    series = {v: np.array([float(r[3 + j]) for r in rows]).reshape(n, T)
              for j, v in enumerate(names)}
    sparse = {}
    base = 3 + len(names)
    for j, (name, obs) in enumerate(sparse_obs.items()):
        pos = [years.index(y) for y in obs]
        full = np.array([float(r[base + j]) if r[base + j] else np.nan for r in rows])
        sparse[name] = (obs, full.reshape(n, T)[:, pos])
    panel = Panel(countries, years, series, ssh, sparse)
    if panel.s != int(header["s"]):
        raise ValueError("group count in header does not match body")
    return panel
