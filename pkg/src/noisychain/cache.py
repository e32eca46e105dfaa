"""Binary persistence for deconvolution tables.

Building a table costs FFTs over every basis function and product pair;
benchmark sweeps reuse one table across hundreds of replicates, so tables
can be saved once and memory-mapped later.  Format (version 1):

    bytes 0:4    magic b"NCHN"
    bytes 4:8    format version, little-endian uint32
    bytes 8:12   header length H, little-endian uint32
    bytes 12:12+H  UTF-8 JSON header: basis parameters, noise parameters,
                   pad, q_floor, band bookkeeping, and the array manifest
                   (name, shape) in file order
    remainder    the arrays, float64 little-endian, concatenated in
                   manifest order

The header carries everything needed to rebuild the basis and noise
objects, so a load is self-contained; saved and rebuilt tables agree
bit-for-bit because table construction is deterministic.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .deconv import DeconvTable
from .errors import ConfigError
from .noise import make_noise
from .wavelets import build_basis

MAGIC = b"NCHN"
FORMAT_VERSION = 1


def _array_manifest(table: DeconvTable):
    """(name, array) pairs in the canonical file order."""
    items = []
    for j, kind in table.basis.families():
        items.append((f"v_single/{j}/{kind}", table.v_single[(j, kind)]))
    for j in sorted(table.v_pair):
        items.append((f"v_pair/{j}", table.v_pair[j]))
    return items


def save_table(table: DeconvTable, path) -> Path:
    """Write one table; returns the path."""
    basis = table.basis
    noise = table.noise
    items = _array_manifest(table)
    header = {
        "format_version": FORMAT_VERSION,
        "basis": {"N": basis.N, "J": basis.J, "m_max": basis.m_max, "G": basis.G},
        "noise": {
            "family": noise.family,
            "lam": noise.lam,
            "zeta": noise.zeta,
            "mu": noise.mu,
        },
        "pad": table.pad,
        "q_floor": table.q_floor,
        "P_eff": table.P_eff,
        "U_eff": table.U_eff,
        "q_lo": table.q_lo,
        "q_hi": table.q_hi,
        "pair_keys": {
            str(j): [list(k) for k, _ in sorted(keys.items(), key=lambda kv: kv[1])]
            for j, keys in table.pair_keys.items()
        },
        "arrays": [[name, list(arr.shape)] for name, arr in items],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for _, arr in items:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return path


def load_table(path) -> DeconvTable:
    """Read a table written by save_table."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ConfigError(f"{path}: not a deconvolution table cache")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported cache version {version}")
    header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    b = header["basis"]
    basis = build_basis(N=b["N"], J=b["J"], m_max=b["m_max"], G=b["G"])
    nz = header["noise"]
    noise = make_noise(nz["family"], lam=nz["lam"], zeta=nz["zeta"], mu=nz["mu"])
    offset = 12 + hlen
    arrays = {}
    for name, shape in header["arrays"]:
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape)
        offset += count * 8
        arrays[name] = arr
    if offset != len(raw):
        raise ConfigError(f"{path}: trailing bytes; file is corrupt")
    v_single = {}
    for j, kind in basis.families():
        v_single[(j, kind)] = arrays[f"v_single/{j}/{kind}"]
    v_pair = {}
    pair_keys = {}
    for j_str, keys in header["pair_keys"].items():
        j = int(j_str)
        v_pair[j] = arrays[f"v_pair/{j}"]
        pair_keys[j] = {(k[0], k[1], k[2], k[3]): r for r, k in enumerate(keys)}
    return DeconvTable(
        basis=basis,
        noise=noise,
        pad=header["pad"],
        q_floor=header["q_floor"],
        P_eff=header["P_eff"],
        U_eff=header["U_eff"],
        q_lo=header["q_lo"],
        q_hi=header["q_hi"],
        v_single=v_single,
        v_pair=v_pair,
        pair_keys=pair_keys,
    )


def check_table(table: DeconvTable, basis_params: dict, noise) -> None:
    """Fail fast when a cached table does not match the requested setup."""
    basis = table.basis
    want = {"N": basis.N, "J": basis.J, "m_max": basis.m_max, "G": basis.G}
    got = {k: basis_params[k] for k in want}
    if want != got:
        raise ConfigError(f"cached table basis {want} does not match requested {got}")
    tn = table.noise
    if (tn.family, tn.lam, tn.zeta, tn.mu) != (noise.family, noise.lam, noise.zeta, noise.mu):
        raise ConfigError("cached table was built for a different noise model")
