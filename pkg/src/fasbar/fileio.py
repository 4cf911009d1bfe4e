"""On-disk formats for kernels, sampling plans, observations, estimates.

Kernels and plans share one container.  The binary flavor is

    8-byte magic "FASBAR1\\0"
    uint32 (little-endian) header length
    UTF-8 JSON header
    raw array bytes, C order, little-endian, in header["arrays"] order

where complex arrays are stored as interleaved real/imag float64 pairs.
A path ending in ".json" selects a textual flavor carrying the same header
and the arrays as flat interleaved lists; JSON floats round-trip exactly.

Port indices inside files are 1-based; in-memory objects are 0-based.

Observations and estimates are small and always JSON.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .channels import PilotObservation
from .kernels import Kernel
from .sbar import Reconstruction, SamplingPlan, plan_to_switch_matrices

MAGIC = b"FASBAR1\x00"
CONTAINER_VERSION = 1

_DTYPES = {"f8": "<f8", "i8": "<i8", "c16": "<c16"}


def _array_to_flat(arr, dtype):
    if dtype == "c16":
        out = np.empty(arr.size * 2, dtype=float)
        out[0::2] = arr.real.ravel()
        out[1::2] = arr.imag.ravel()
        return out.tolist()
    return np.asarray(arr).ravel().tolist()


def _array_from_flat(flat, dtype, shape):
    if dtype == "c16":
        raw = np.asarray(flat, dtype=float)
        arr = raw[0::2] + 1j * raw[1::2]
        return arr.reshape(shape)
    return np.asarray(flat, dtype=_DTYPES[dtype]).reshape(shape)


def write_container(path, header, arrays):
    """Write named arrays under a JSON header; flavor chosen by suffix.

    ``header`` must not already contain the reserved "arrays" key.  Items of
    ``arrays`` are (name -> ndarray); dtypes are mapped to f8/i8/c16.
    """
    path = Path(path)
    specs = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        if np.iscomplexobj(arr):
            tag = "c16"
        elif np.issubdtype(arr.dtype, np.integer):
            tag = "i8"
        else:
            tag = "f8"
        arr = np.ascontiguousarray(arr, dtype=_DTYPES[tag])
        specs.append({"name": name, "dtype": tag, "shape": list(arr.shape)})
        blobs.append((arr, tag))
    full_header = dict(header)
    full_header["container_version"] = CONTAINER_VERSION
    full_header["arrays"] = specs
    if path.suffix == ".json":
        doc = dict(full_header)
        doc["array_data"] = {
            spec["name"]: _array_to_flat(arr, tag) for spec, (arr, tag) in zip(specs, blobs)
        }
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        return
    head_bytes = json.dumps(full_header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(head_bytes)))
        fh.write(head_bytes)
        for arr, _ in blobs:
            fh.write(arr.tobytes(order="C"))


def read_container(path):
    """Inverse of ``write_container``; returns (header, arrays)."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("container_version") != CONTAINER_VERSION:
            raise ValueError(f"unsupported container version {doc.get('container_version')!r}")
        data = doc.pop("array_data")
        arrays = {
            spec["name"]: _array_from_flat(data[spec["name"]], spec["dtype"], spec["shape"])
            for spec in doc["arrays"]
        }
        return doc, arrays
    raw = path.read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path} is not a fasbar container")
    (head_len,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    header = json.loads(raw[start : start + head_len].decode("utf-8"))
    if header.get("container_version") != CONTAINER_VERSION:
        raise ValueError(f"unsupported container version {header.get('container_version')!r}")
    offset = start + head_len
    arrays = {}
    for spec in header["arrays"]:
        dt = np.dtype(_DTYPES[spec["dtype"]])
        count = int(np.prod(spec["shape"], dtype=int)) if spec["shape"] else 1
        end = offset + count * dt.itemsize
        arrays[spec["name"]] = (
            np.frombuffer(raw[offset:end], dtype=dt).reshape(spec["shape"]).copy()
        )
        offset = end
    return header, arrays


def save_kernel(path, kernel):
    """Persist a kernel with its hyperparameters and carrier."""
    header = {
        "content": "kernel",
        "kind": kernel.kind,
        "num_ports": kernel.num_ports,
        "alpha": kernel.alpha,
        "eta": kernel.eta,
        "order": kernel.order,
        "jitter": kernel.jitter,
        "carrier_hz": kernel.carrier_hz,
    }
    write_container(path, header, {"matrix": kernel.matrix})


def load_kernel(path):
    header, arrays = read_container(path)
    if header.get("content") != "kernel":
        raise ValueError(f"{path} does not hold a kernel")
    return Kernel(
        matrix=arrays["matrix"],
        kind=header["kind"],
        alpha=float(header["alpha"]),
        eta=float(header["eta"]),
        order=int(header["order"]),
        jitter=float(header["jitter"]),
        carrier_hz=float(header["carrier_hz"]),
    )


def save_plan(path, plan):
    """Persist a sampling plan; the measurement order is stored 1-based."""
    header = {
        "content": "plan",
        "num_ports": plan.num_ports,
        "num_timeslots": plan.num_timeslots,
        "antennas_per_slot": plan.antennas_per_slot,
        "noise_power": plan.noise_power_design,
        "kernel_fingerprint": plan.kernel_fingerprint,
        "order": [int(p) + 1 for p in plan.order],
    }
    write_container(path, header, {"weights": plan.weights, "post_diag": plan.post_diag})


def load_plan(path):
    header, arrays = read_container(path)
    if header.get("content") != "plan":
        raise ValueError(f"{path} does not hold a sampling plan")
    order = tuple(int(p) - 1 for p in header["order"])
    p, m = int(header["num_timeslots"]), int(header["antennas_per_slot"])
    n = int(header["num_ports"])
    return SamplingPlan(
        num_ports=n,
        num_timeslots=p,
        antennas_per_slot=m,
        order=order,
        switch_matrices=plan_to_switch_matrices(order, p, m, n),
        weights=arrays["weights"],
        noise_power_design=float(header["noise_power"]),
        kernel_fingerprint=header["kernel_fingerprint"],
        post_diag=arrays["post_diag"],
    )


def save_observation(path, observation):
    doc = {
        "content": "observation",
        "plan_id": observation.plan_id,
        "noise_power": observation.noise_power,
        "values": [[float(v.real), float(v.imag)] for v in np.asarray(observation.values)],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_observation(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("content") != "observation":
        raise ValueError(f"{path} does not hold an observation")
    values = np.array([complex(re, im) for re, im in doc["values"]])
    return PilotObservation(values, float(doc["noise_power"]), doc["plan_id"])


def save_estimate(path, reconstruction):
    def pairs(arr):
        return [[float(v.real), float(v.imag)] for v in np.asarray(arr)]

    doc = {
        "content": "estimate",
        "estimate": pairs(reconstruction.estimate),
        "post_variance": [float(v) for v in reconstruction.post_variance],
        "confidence_lo": pairs(reconstruction.confidence_lo),
        "confidence_hi": pairs(reconstruction.confidence_hi),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_estimate(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("content") != "estimate":
        raise ValueError(f"{path} does not hold an estimate")

    def arr(key):
        return np.array([complex(re, im) for re, im in doc[key]])

    return Reconstruction(
        estimate=arr("estimate"),
        post_variance=np.asarray(doc["post_variance"], dtype=float),
        confidence_lo=arr("confidence_lo"),
        confidence_hi=arr("confidence_hi"),
    )
