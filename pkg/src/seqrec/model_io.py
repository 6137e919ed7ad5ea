"""Model file container: bit-exact save/load of parameters and optimizer state.

The file is a numpy ``.npz`` archive: each member is a named tensor stored
as little-endian IEEE-754 doubles with its shape, plus a JSON header member
carrying the format version, the network config, the catalog digest and the
optimizer settings. Gate weights are stored per gate (W_i, U_i, b_i, ...)
even though they live packed in memory.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .network import Network, NetworkConfig, parameter_blocks
from .optimize import Optimizer, OptimizerConfig

FORMAT_VERSION = 1


def catalog_digest(item_ids) -> str:
    """Digest of the dense-index -> original-id mapping."""
    h = hashlib.sha256()
    for orig in item_ids:
        h.update(str(orig).encode())
        h.update(b",")
    return h.hexdigest()[:16]


def config_digest(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, default=str).encode()
    ).hexdigest()[:16]


def save_model(path: str | Path, net: Network, catalog: str = "",
               optimizer: Optimizer | None = None,
               extra_meta: dict | None = None) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "network": asdict(net.config),
        "catalog_digest": catalog,
        "optimizer": asdict(optimizer.config) if optimizer else None,
        "meta": extra_meta or {},
    }
    members: dict[str, np.ndarray] = {
        "__header__": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)
    }
    blocks = parameter_blocks(net.config)
    for name, (key, rows) in blocks.items():
        members[f"param/{name}"] = np.ascontiguousarray(net.params[key][rows], dtype="<f8")
    if optimizer is not None:
        state = optimizer.state_arrays()
        for name, (key, rows) in blocks.items():
            if key in state:
                members[f"opt/{name}"] = np.ascontiguousarray(state[key][rows], dtype="<f8")
    with open(path, "wb") as fh:
        np.savez(fh, **members)


def _repack(config: NetworkConfig, member_of: dict[str, np.ndarray],
            prefix: str) -> dict[str, np.ndarray]:
    packed: dict[str, np.ndarray] = {}
    for name, (key, rows) in parameter_blocks(config).items():
        member = member_of.get(f"{prefix}/{name}")
        if member is None:
            raise KeyError(f"model file is missing tensor {prefix}/{name}")
        if key not in packed:
            shape = _packed_shape(config, key, member)
            packed[key] = np.empty(shape)
        packed[key][rows] = member
    return packed


def _packed_shape(config: NetworkConfig, key: str, member: np.ndarray):
    from .cells import GATE_COUNT

    if key.startswith("out"):
        return member.shape
    G = GATE_COUNT[config.cell_kind]
    if member.ndim == 1:
        return (G * member.shape[0],)
    return (G * member.shape[0], member.shape[1])


def load_model(path: str | Path) -> tuple[Network, dict, Optimizer | None]:
    """Reload (network, header, optimizer). Bit-exact for all tensors."""
    with np.load(path) as npz:
        members = {k: npz[k] for k in npz.files}
    header = json.loads(bytes(members.pop("__header__")).decode())
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {header.get('format_version')}")
    config = NetworkConfig(**header["network"])
    params = _repack(config, members, "param")
    net = Network(config, params)
    optimizer = None
    if header.get("optimizer"):
        optimizer = Optimizer(OptimizerConfig(**header["optimizer"]), params)
        if any(k.startswith("opt/") for k in members):
            optimizer.load_state(_repack(config, members, "opt"))
    return net, header, optimizer
