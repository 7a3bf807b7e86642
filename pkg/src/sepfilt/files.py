"""Canonical file emission and the run manifest.

All documents are JSON with sorted keys and a trailing newline so reruns of
the same manifest are byte-identical; CSV rows use repr floats for the same
reason.
"""

from __future__ import annotations

import hashlib
import json
import os


def canonical_dumps(payload):
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(canonical_dumps(payload))


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def sha256_of(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


CSV_HEADER = "kind,center,r1,r2,lhs,rhs,residual,budget,violated"


def write_checks_csv(path, checks):
    lines = [CSV_HEADER]
    for check in checks:
        row = check.to_row()
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x)
                              for x in row))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def write_manifest(path, command, inputs, config, outputs, version):
    """Record what ran: input paths plus digests of every file touched."""
    payload = {
        "command": command,
        "config": config,
        "input_paths": sorted(str(p) for p in inputs),
        "inputs": {os.path.basename(p): sha256_of(p) for p in inputs},
        "outputs": {os.path.basename(p): sha256_of(p) for p in outputs},
        "version": version,
    }
    write_json(path, payload)
    return payload
