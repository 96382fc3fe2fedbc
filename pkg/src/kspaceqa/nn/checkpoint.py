"""Versioned binary model checkpoints.

Layout: magic ``KQCK``, uint32 version, uint64 header length, UTF-8 JSON
header, then the raw parameter arrays back to back, little-endian, in
header-manifest order. The header carries arbitrary model metadata under
``meta`` plus an ``arrays`` manifest of {shape, dtype} entries. Round
trips are bit-exact.
"""

import json

import numpy as np

MAGIC = b"KQCK"
VERSION = 1


def save_checkpoint(path, meta, arrays):
    manifest = []
    blobs = []
    for a in arrays:
        a = np.ascontiguousarray(a)
        le = a.dtype.newbyteorder("<")
        manifest.append({"shape": list(a.shape), "dtype": le.str})
        blobs.append(a.astype(le, copy=False).tobytes())
    header = json.dumps({"meta": meta, "arrays": manifest}).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.array([VERSION], dtype="<u4").tobytes())
        f.write(np.array([len(header)], dtype="<u8").tobytes())
        f.write(header)
        for b in blobs:
            f.write(b)


def load_checkpoint(path):
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise ValueError(f"{path}: not a checkpoint (bad magic)")
        version = int(np.frombuffer(f.read(4), dtype="<u4")[0])
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        hlen = int(np.frombuffer(f.read(8), dtype="<u8")[0])
        header = json.loads(f.read(hlen).decode())
        arrays = []
        for entry in header["arrays"]:
            dt = np.dtype(entry["dtype"])
            count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
            buf = f.read(count * dt.itemsize)
            if len(buf) != count * dt.itemsize:
                raise ValueError(f"{path}: truncated parameter payload")
            arrays.append(np.frombuffer(buf, dtype=dt)
                          .reshape(entry["shape"]).copy())
        trailing = f.read(1)
        if trailing:
            raise ValueError(f"{path}: trailing bytes after parameter payload")
    return header["meta"], arrays
