"""Writes the graph corpus under data/: every graph on at most five vertices
paired with a relabeled copy, every non-isomorphic pair on at most five
vertices with equal degree sequences, and a few named graphs."""

import itertools
import json
import os
import random

ROOT = os.path.join(os.path.dirname(__file__), "..", "data")


def canonical(n, edges):
    best = None
    for p in itertools.permutations(range(n)):
        key = tuple(sorted(tuple(sorted((p[a], p[b]))) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    seen = {}
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        seen.setdefault(canonical(n, edges), edges)
    return sorted(seen.values(), key=lambda e: (len(e), e))


def graph_json(n, edges, prefix):
    return {
        "vertices": [f"{prefix}{i}" for i in range(n)],
        "edges": [[f"{prefix}{a}", f"{prefix}{b}"] for a, b in edges],
    }


def degrees(n, edges):
    d = [0] * n
    for a, b in edges:
        d[a] += 1
        d[b] += 1
    return sorted(d, reverse=True)


def write(path, doc):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def main():
    rng = random.Random(20240601)
    corpus = os.path.join(ROOT, "corpus")
    for n in range(1, 6):
        gs = graphs(n)
        for i, edges in enumerate(gs):
            perm = list(range(n))
            rng.shuffle(perm)
            relabeled = [(perm[a], perm[b]) for a, b in edges]
            doc = {
                "id": f"iso-n{n}-{i:02}",
                "g": graph_json(n, edges, "u"),
                "h": graph_json(n, relabeled, "v"),
            }
            write(os.path.join(corpus, f"iso-n{n}-{i:02}.json"), doc)
        k = 0
        for (i, a), (j, b) in itertools.combinations(enumerate(gs), 2):
            if degrees(n, a) == degrees(n, b):
                doc = {
                    "id": f"noniso-n{n}-{k}",
                    "g": graph_json(n, a, "u"),
                    "h": graph_json(n, b, "v"),
                }
                write(os.path.join(corpus, f"noniso-n{n}-{k}.json"), doc)
                k += 1

    named = os.path.join(ROOT, "graphs")
    cycle6 = [(i, (i + 1) % 6) for i in range(6)]
    triangles = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    write(os.path.join(named, "c6.json"), graph_json(6, cycle6, "u"))
    write(os.path.join(named, "two_triangles.json"), graph_json(6, triangles, "v"))
    write(os.path.join(named, "k1.json"), graph_json(1, [], "u"))
    write(os.path.join(named, "k2.json"), graph_json(2, [(0, 1)], "v"))
    write(os.path.join(named, "path3.json"), graph_json(3, [(0, 1), (1, 2)], "u"))


if __name__ == "__main__":
    main()
