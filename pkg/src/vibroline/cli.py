"""Command-line surface and text formats.

All file I/O lives here; the compute modules stay pure.  Outputs are
byte-deterministic: fixed 12-significant-digit float formatting, LF line
endings, fixed key order.  Every failure path prints a single
machine-parsable line ``ERROR:<code>:<module>:<name>: <detail>`` to stderr
and exits with the matching code.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import ifcfit, phonons, thermal, vibronic
from .errors import (
    DegenerateData,
    DimensionMismatch,
    GridTooCoarse,
    InconsistentIndices,
    InsufficientData,
    MismatchedStructures,
    NoPeaks,
    NonConvergence,
    NotCommensurate,
    NotHermitian,
    ParseError,
    SingularFit,
    VibrolineError,
    WindowTooNarrow,
    WrapAmbiguity,
)
from .model import AtomSite, CrystalStructure, ForceConstants, GeometryPair

EXIT_CODES: dict[type, int] = {
    ParseError: 2,
    NotHermitian: 3,
    InconsistentIndices: 3,
    MismatchedStructures: 4,
    WrapAmbiguity: 4,
    DimensionMismatch: 5,
    GridTooCoarse: 5,
    WindowTooNarrow: 5,
    NoPeaks: 5,
    SingularFit: 6,
    InsufficientData: 6,
    DegenerateData: 7,
    NonConvergence: 7,
    NotCommensurate: 8,
}


def thread_cap() -> int:
    """Worker cap from VIBROLINE_THREADS (0 or unset means auto)."""
    raw = os.environ.get("VIBROLINE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ParseError(f"VIBROLINE_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ParseError("VIBROLINE_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# formatting


def fmt(x: float) -> str:
    """12-significant-digit representation, stable across runs."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return f"{x:.12g}"


def _json_ready(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_json_ready(payload), indent=2) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# text formats


def _numbered_lines(path: str | Path) -> list[tuple[int, str]]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return [(no, line) for no, line in enumerate(raw.splitlines(), start=1)]


def _floats(path, lineno: int, line: str, count: int) -> list[float]:
    parts = line.split()
    if len(parts) != count:
        raise ParseError(
            f"{path} line {lineno}: expected {count} fields, found {len(parts)}"
        )
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ParseError(f"{path} line {lineno}: {exc}") from exc


def read_structure(path: str | Path) -> CrystalStructure:
    """Lattice-and-sites text file.

    Line 1 is a free comment; lines 2-4 the lattice rows (A); line 5 the
    atom count N; the next N lines carry ``symbol mass x y z``.
    """
    lines = _numbered_lines(path)
    if len(lines) < 5:
        raise ParseError(f"{path}: file truncated before the atom count")
    lattice = [
        _floats(path, lines[k][0], lines[k][1], 3) for k in (1, 2, 3)
    ]
    no, count_line = lines[4]
    try:
        n = int(count_line.split()[0])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path} line {no}: bad atom count") from exc
    if len(lines) < 5 + n:
        raise ParseError(f"{path}: expected {n} site lines, file ends early")
    sites = []
    for k in range(5, 5 + n):
        no, line = lines[k]
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(f"{path} line {no}: expected 'symbol mass x y z'")
        try:
            sites.append(
                AtomSite(parts[0], float(parts[1]), np.array([float(p) for p in parts[2:]]))
            )
        except ValueError as exc:
            raise ParseError(f"{path} line {no}: {exc}") from exc
    try:
        return CrystalStructure(lattice=np.array(lattice), sites=tuple(sites))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_structure(path: Path, structure: CrystalStructure, comment: str = "") -> None:
    lines = [comment or "structure"]
    for row in structure.lattice:
        lines.append(" ".join(fmt(v) for v in row))
    lines.append(str(structure.n_atoms))
    for s in structure.sites:
        lines.append(
            f"{s.species} {fmt(s.mass)} " + " ".join(fmt(v) for v in s.position)
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_force_constants(path: str | Path, structure: CrystalStructure) -> ForceConstants:
    """Pair-block force constants: line 1 N, then ``i j`` headers each
    followed by three rows of three floats (eV/A^2).  Indices are 0-based;
    omitted symmetric counterparts are reconstructed."""
    lines = _numbered_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty force-constant file")
    no0, first = lines[0]
    try:
        n = int(first.split()[0])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path} line {no0}: bad atom count") from exc
    if n != structure.n_atoms:
        raise ParseError(
            f"{path} line {no0}: atom count {n} does not match structure "
            f"({structure.n_atoms})"
        )
    blocks: dict[tuple[int, int], np.ndarray] = {}
    k = 1
    while k < len(lines):
        no, header = lines[k]
        if not header.strip():
            k += 1
            continue
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(f"{path} line {no}: expected pair header 'i j'")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"{path} line {no}: {exc}") from exc
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"{path} line {no}: pair ({i}, {j}) out of range")
        if k + 3 >= len(lines) + 1 and len(lines) - k - 1 < 3:
            raise ParseError(f"{path} line {no}: truncated block for pair ({i}, {j})")
        rows = []
        for r in range(3):
            rno, rline = lines[k + 1 + r]
            rows.append(_floats(path, rno, rline, 3))
        block = np.array(rows)
        if (i, j) in blocks and not np.allclose(blocks[(i, j)], block, atol=1e-8):
            raise ParseError(f"{path} line {no}: conflicting duplicate block ({i}, {j})")
        blocks[(i, j)] = block
        k += 4
    try:
        return ForceConstants(blocks, structure)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_force_constants(path: Path, fc: ForceConstants) -> None:
    lines = [str(fc.structure.n_atoms)]
    for i, j in fc.pairs():
        if i > j:
            continue  # counterpart reconstructed on read
        lines.append(f"{i} {j}")
        for row in fc.block(i, j):
            lines.append(" ".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_snapshots(path: str | Path, n_atoms: int) -> list[ifcfit.TrainingSnapshot]:
    """Repeated records: ``snapshot k`` header then N ``dx dy dz fx fy fz``
    lines.  An empty file yields an empty list."""
    lines = _numbered_lines(path)
    out = []
    k = 0
    while k < len(lines):
        no, line = lines[k]
        if not line.strip():
            k += 1
            continue
        if not line.split()[0] == "snapshot":
            raise ParseError(f"{path} line {no}: expected 'snapshot <k>' header")
        if len(lines) - k - 1 < n_atoms:
            raise ParseError(f"{path} line {no}: truncated snapshot record")
        disp = np.empty((n_atoms, 3))
        forc = np.empty((n_atoms, 3))
        for a in range(n_atoms):
            rno, rline = lines[k + 1 + a]
            vals = _floats(path, rno, rline, 6)
            disp[a] = vals[:3]
            forc[a] = vals[3:]
        out.append(ifcfit.TrainingSnapshot(displacements=disp, forces=forc))
        k += 1 + n_atoms
    return out


def write_snapshots(path: Path, snapshots) -> None:
    lines = []
    for k, snap in enumerate(snapshots):
        lines.append(f"snapshot {k}")
        for u, f in zip(snap.displacements, snap.forces):
            lines.append(" ".join(fmt(v) for v in (*u, *f)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_thermal_csv(path: str | Path) -> thermal.ThermalSeries:
    """CSV with header ``T_K,value`` or ``T_K,value,sigma``."""
    lines = _numbered_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty series file")
    header = [h.strip() for h in lines[0][1].split(",")]
    if header not in (["T_K", "value"], ["T_K", "value", "sigma"]):
        raise ParseError(f"{path} line 1: header must be T_K,value[,sigma]")
    pts = []
    for no, line in lines[1:]:
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(header):
            raise ParseError(f"{path} line {no}: expected {len(header)} columns")
        try:
            t, v = float(parts[0]), float(parts[1])
            s = float(parts[2]) if len(parts) == 3 else None
        except ValueError as exc:
            raise ParseError(f"{path} line {no}: {exc}") from exc
        pts.append((t, v, s))
    if len(pts) < 4:
        raise ParseError(f"{path}: fewer than 4 data points ({len(pts)})")
    try:
        return thermal.ThermalSeries(points=tuple(pts))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def read_lattice(path: str | Path) -> np.ndarray:
    """Three rows of three floats; '#' lines are comments."""
    rows = []
    for no, line in _numbered_lines(path):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rows.append(_floats(path, no, line, 3))
    if len(rows) != 3:
        raise ParseError(f"{path}: expected exactly 3 lattice rows, found {len(rows)}")
    return np.array(rows)


def read_qpath(path: str | Path) -> list[np.ndarray]:
    """Fractional q-points, one ``qx qy qz`` per line; '#' comments."""
    pts = []
    for no, line in _numbered_lines(path):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        pts.append(np.array(_floats(path, no, line, 3)))
    if not pts:
        raise ParseError(f"{path}: empty q-point path")
    return pts


# ---------------------------------------------------------------------------
# config files


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


#: key -> parser for option values; shared across commands
CONFIG_SCHEMA = {
    "zpl_energy_mev": float,
    "sigma_mev": float,
    "zpl_width_mev": float,
    "grid_min_mev": float,
    "grid_max_mev": float,
    "grid_spacing_mev": float,
    "photon_prefactor": _parse_bool,
    "e_ph_mev": lambda raw: [float(p) for p in raw.split(",")],
    "cutoff_a": float,
    "ridge": float,
    "rfe": _parse_bool,
    "rfe_target_fraction": float,
    "rfe_tolerance_mev_per_a": float,
    "output_dir": str,
}


def read_config(path: str | Path) -> dict:
    out: dict = {}
    for no, line in _numbered_lines(path):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"{path} line {no}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_SCHEMA:
            raise ParseError(f"{path} line {no}: unknown key {key!r}")
        try:
            out[key] = CONFIG_SCHEMA[key](raw.strip())
        except ValueError as exc:
            raise ParseError(f"{path} line {no}: {exc}") from exc
    return out


def _merge_option(args, config: dict, key: str, default=None):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    return config.get(key, default)


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _lineshape_config(args, config: dict, coupling) -> vibronic.LineshapeConfig:
    zpl = _merge_option(args, config, "zpl_energy_mev")
    if zpl is None:
        raise ParseError("zpl_energy_mev is required (flag --zpl-energy or config)")
    sigma = _merge_option(args, config, "sigma_mev", 5.0)
    width = _merge_option(args, config, "zpl_width_mev", 1.0)
    spacing = _merge_option(args, config, "grid_spacing_mev", sigma / 3.0)
    active = ~coupling.excluded & (coupling.hr > 0)
    max_mode = float(np.max(coupling.energies_mev[active])) if np.any(active) else 0.0
    # default window is generous: the elastic-line Lorentzian wings decay
    # as 1/s^2, so clearing the 0.1% leakage check needs O(1000 gamma) of
    # padding on both sides of the replica progression
    pad = 50.0 * sigma + 1600.0 * width
    lo_default = max(zpl - 10.0 * max_mode - pad, spacing)
    e_min = _merge_option(args, config, "grid_min_mev", lo_default)
    e_max = _merge_option(args, config, "grid_max_mev", zpl + 10.0 * sigma + pad)
    prefactor = _merge_option(args, config, "photon_prefactor", True)
    return vibronic.LineshapeConfig(
        zpl_energy=zpl,
        grid=(e_min, e_max, spacing),
        sigma=sigma,
        zpl_width=width,
        photon_prefactor=prefactor,
    )


def _spectrum_rows(spectrum) -> list[tuple[float, float]]:
    return [
        (float(e), float(y))
        for e, y in zip(spectrum.energies, spectrum.intensities)
    ]


def _summary_payload(coupling, spectrum) -> dict:
    peaks = None
    try:
        peaks = vibronic.peak_spacing(spectrum)
    except NoPeaks:
        pass
    spacings = [s for _, s in peaks[1:]] if peaks else []
    first_offset = spacings[0] if spacings else None
    return {
        "total_hr": coupling.total_hr,
        "dw_factor": vibronic.debye_waller(coupling),
        "zpl_energy_meV": spectrum.zpl_energy,
        "first_peak_offset_meV": first_offset,
        "peak_spacings_meV": spacings,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_phonons(args) -> int:
    structure = read_structure(args.structure)
    fc = phonons.enforce_asr(read_force_constants(args.fc, structure))
    if args.q:
        qpoints = []
        for raw in args.q:
            parts = raw.split(",")
            if len(parts) != 3:
                raise ParseError(f"bad q-point {raw!r}; expected qx,qy,qz")
            try:
                qpoints.append(np.array([float(p) for p in parts]))
            except ValueError as exc:
                raise ParseError(f"bad q-point {raw!r}: {exc}") from exc
    else:
        qpoints = [np.zeros(3)]
        print("note: no q-points given; assuming the zone centre", file=sys.stderr)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    vec_rows = []
    for q in qpoints:
        basis = phonons.diagonalize(
            phonons.dynamical_matrix(fc, structure, q), structure.masses, qpoint=q
        )
        for k, energy in enumerate(basis.frequencies):
            rows.append((float(q[0]), float(q[1]), float(q[2]), k, float(energy)))
            if args.eigenvectors:
                for c, z in enumerate(basis.eigenvectors[k]):
                    vec_rows.append(
                        (float(q[0]), float(q[1]), float(q[2]), k, c,
                         float(z.real), float(z.imag))
                    )
    write_csv(out_dir / "phonons.csv", "qx,qy,qz,mode_index,energy_meV", rows)
    if args.eigenvectors:
        write_csv(
            out_dir / args.eigenvectors,
            "qx,qy,qz,mode_index,component,real,imag",
            vec_rows,
        )
    return 0


def _load_pair_and_coupling(args):
    ground = read_structure(args.ground)
    excited = read_structure(args.excited)
    pair = GeometryPair(ground=ground, excited=excited)
    fc = read_force_constants(args.fc, ground)
    return pair, vibronic.zone_center_coupling(pair, fc)


def cmd_lineshape(args) -> int:
    config_file = read_config(args.config) if args.config else {}
    pair, coupling = _load_pair_and_coupling(args)
    cfg = _lineshape_config(args, config_file, coupling)
    spectrum = vibronic.lineshape(coupling, cfg)
    out_dir = Path(_merge_option(args, config_file, "output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "spectrum.csv", "energy_meV,intensity", _spectrum_rows(spectrum))
    write_json(out_dir / "summary.json", _summary_payload(coupling, spectrum))
    return 0


def cmd_partial(args) -> int:
    config_file = read_config(args.config) if args.config else {}
    pair, coupling = _load_pair_and_coupling(args)
    cfg = _lineshape_config(args, config_file, coupling)
    cutoffs = args.e_ph if args.e_ph else config_file.get("e_ph_mev")
    if not cutoffs:
        raise ParseError("at least one --e-ph cutoff is required")
    out_dir = Path(_merge_option(args, config_file, "output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    for cutoff in cutoffs:
        truncated = coupling.truncated(cutoff)
        spectrum = vibronic.lineshape(truncated, cfg)
        tag = f"cutoff{cutoff:g}"
        write_csv(
            out_dir / f"spectrum_{tag}.csv", "energy_meV,intensity", _spectrum_rows(spectrum)
        )
        write_json(out_dir / f"summary_{tag}.json", _summary_payload(truncated, spectrum))
    return 0


def cmd_fit_ifc(args) -> int:
    config_file = read_config(args.config) if args.config else {}
    structure = read_structure(args.structure)
    snapshots = read_snapshots(args.snapshots, structure.n_atoms)
    cutoff = _merge_option(args, config_file, "cutoff_a")
    if cutoff is None:
        raise ParseError("cutoff_a is required (flag --cutoff or config)")
    ridge = _merge_option(args, config_file, "ridge", ifcfit.DEFAULT_RIDGE)
    features = ifcfit.build_features(structure, cutoff)
    use_rfe = bool(_merge_option(args, config_file, "rfe", False))
    if use_rfe:
        report = ifcfit.rfe(
            snapshots,
            features,
            target_fraction=_merge_option(args, config_file, "rfe_target_fraction"),
            tolerance=_merge_option(args, config_file, "rfe_tolerance_mev_per_a", 0.0),
            ridge=ridge,
        )
    else:
        report = ifcfit.fit(snapshots, features, ridge=ridge)
    out_dir = Path(_merge_option(args, config_file, "output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    write_force_constants(out_dir / "force_constants.txt", report.fc)
    write_json(
        out_dir / "fit_report.json",
        {
            "rmse_validation_meV_per_A": report.rmse_validation,
            "n_parameters_initial": report.n_parameters_initial,
            "n_parameters_final": report.n_parameters_final,
            "cutoff_A": report.cutoff,
            "rank": report.rank,
        },
    )
    return 0


def cmd_arrhenius(args) -> int:
    series = read_thermal_csv(args.csv)
    result = thermal.fit(series)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(
        out_dir / "arrhenius.json",
        {
            "amplitude": result.amplitude,
            "c": result.c,
            "e_a_meV": result.e_a,
            "sigma_e_a_meV": result.sigma_e_a,
            "rms_residual": result.rms_residual,
        },
    )
    return 0


def cmd_unfold(args) -> int:
    supercell = read_structure(args.supercell)
    fc = phonons.enforce_asr(read_force_constants(args.fc, supercell))
    primitive = read_lattice(args.primitive_lattice)
    path = read_qpath(args.path)

    # commensurability is checked up front so a bad lattice fails fast
    phonons._commensurate_multiplier(supercell.lattice, primitive)

    b_prim = phonons.reciprocal_lattice(primitive)
    b_sc_inv = supercell.lattice.T / (2.0 * np.pi)
    folded = []
    for q in path:
        q_sc = (np.asarray(q) @ b_prim @ b_sc_inv) % 1.0
        folded.append(tuple(np.round(q_sc, 8) % 1.0))
    unique = sorted(set(folded))

    def solve(key):
        q = np.array(key)
        basis = phonons.diagonalize(
            phonons.dynamical_matrix(fc, supercell, q), supercell.masses, qpoint=q
        )
        return basis

    workers = min(thread_cap(), len(unique))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bases = list(pool.map(solve, unique))
    else:
        bases = [solve(key) for key in unique]

    weights = phonons.unfold(bases, supercell, primitive, path)
    rows = []
    for idx, (q, entry) in enumerate(zip(weights.path, weights.entries)):
        for energy, w in entry:
            rows.append(
                (idx, float(q[0]), float(q[1]), float(q[2]), float(energy), float(w))
            )
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "unfolded.csv", "path_index,qx,qy,qz,energy_meV,weight", rows)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibroline",
        description="Phonon sidebands, mode couplings, and lattice dynamics "
        "for point-defect emission.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phonons", help="mode energies from force constants")
    p.add_argument("structure")
    p.add_argument("fc")
    p.add_argument("--q", action="append", help="reduced q-point 'qx,qy,qz'; repeatable")
    p.add_argument("--eigenvectors", help="also write eigenvectors to this CSV name")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_phonons)

    common = {
        "--zpl-energy": ("zpl_energy_mev", float, "elastic line energy in meV"),
        "--sigma": ("sigma_mev", float, "phonon broadening in meV"),
        "--zpl-width": ("zpl_width_mev", float, "elastic line half width in meV"),
        "--grid-min": ("grid_min_mev", float, "output window lower edge in meV"),
        "--grid-max": ("grid_max_mev", float, "output window upper edge in meV"),
        "--grid-spacing": ("grid_spacing_mev", float, "output spacing in meV"),
    }
    for name in ("lineshape", "partial"):
        p = sub.add_parser(name, help=f"{name} spectrum from a geometry pair")
        p.add_argument("ground")
        p.add_argument("excited")
        p.add_argument("fc")
        for flag, (dest, typ, help_text) in common.items():
            p.add_argument(flag, dest=dest, type=typ, help=help_text)
        p.add_argument(
            "--no-photon-prefactor",
            dest="photon_prefactor",
            action="store_const",
            const=False,
            help="skip the cubed photon-energy prefactor",
        )
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--output-dir", dest="output_dir")
        if name == "partial":
            p.add_argument(
                "--e-ph",
                action="append",
                type=float,
                help="phonon energy cutoff in meV; repeatable",
            )
            p.set_defaults(func=cmd_partial)
        else:
            p.set_defaults(func=cmd_lineshape)

    p = sub.add_parser("fit-ifc", help="fit pair force constants to snapshots")
    p.add_argument("structure")
    p.add_argument("snapshots")
    p.add_argument("--cutoff", dest="cutoff_a", type=float, help="pair cutoff in A")
    p.add_argument("--ridge", dest="ridge", type=float)
    p.add_argument("--rfe", dest="rfe", action="store_const", const=True)
    p.add_argument("--rfe-target-fraction", dest="rfe_target_fraction", type=float)
    p.add_argument("--rfe-tolerance", dest="rfe_tolerance_mev_per_a", type=float)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_fit_ifc)

    p = sub.add_parser("arrhenius", help="activation-energy fit of a T series")
    p.add_argument("csv")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_arrhenius)

    p = sub.add_parser("unfold", help="project supercell modes on a primitive path")
    p.add_argument("fc")
    p.add_argument("supercell")
    p.add_argument("primitive_lattice")
    p.add_argument("path")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_unfold)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VibrolineError as err:
        code = EXIT_CODES.get(type(err), 3)
        print(f"ERROR:{code}:{err.module}:{err.name}: {err}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
