"""Writes tests/fixtures/limewire_regions.jsonl.gz.

Every column of the printed LimeWire region matrix becomes PAIRS two-record
traces leaving that region, split over destination regions in proportion to
the column (largest-remainder rounding). Analyzing the file must give back
the matrix to within rounding.
"""

import gzip
import json
import pathlib

G_L = [
    [0.9878, 0.0023, 0.0401, 0.0116],
    [0.0029, 0.9325, 0.3666, 0.0787],
    [0.0089, 0.0645, 0.5880, 0.1829],
    [0.0005, 0.0007, 0.0052, 0.7269],
]
# One lattice point inside each default LimeWire rectangle: LSR, USR, TB, UDR.
POINTS = [(0, 2), (20, 28), (0, 23), (6, 0)]
PAIRS = 2000


def split(column, total):
    scale = total / sum(column)
    raw = [p * scale for p in column]
    counts = [int(r) for r in raw]
    order = sorted(range(len(raw)), key=lambda i: raw[i] - counts[i], reverse=True)
    for i in order[: total - sum(counts)]:
        counts[i] += 1
    return counts


def record(peer, t, point):
    leaves, ultras = point
    return {
        "peer": peer,
        "t": t,
        "mode": "ultra" if ultras >= 10 or leaves > 2 else "leaf",
        "sw": "limewire-4.x",
        "leaves": [f"l{i}" for i in range(leaves)],
        "ultras": [f"u{i}" for i in range(ultras)],
    }


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "limewire_regions.jsonl.gz"
    lines = []
    n = 0
    for j in range(4):
        counts = split([G_L[i][j] for i in range(4)], PAIRS)
        for i, c in enumerate(counts):
            for _ in range(c):
                peer = f"f{n:05d}"
                n += 1
                lines.append(json.dumps(record(peer, 0, POINTS[j]), separators=(",", ":")))
                lines.append(json.dumps(record(peer, 1800, POINTS[i]), separators=(",", ":")))
    data = ("\n".join(lines) + "\n").encode()
    with open(out, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as gz:
        gz.write(data)


if __name__ == "__main__":
    main()
