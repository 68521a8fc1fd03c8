#!/usr/bin/env python3
"""Download the seven benchmark datasets and convert them to the formats the
CLI expects (edges.tsv / features.txt / labels.tsv under data/<name>/).

Sources:
  texas, wisconsin, cornell, actor  -> the geom-gcn repository (webpage and
                                       actor co-occurrence graphs, plain text)
  cora, citeseer                    -> LINQS archives (<name>.content/.cites)
  pubmed                            -> LINQS Pubmed-Diabetes archive

Usage:
  python3 tools/fetch_datasets.py [--out data] [--only texas,cora,...]

Requires network access. Every output file is plain text; see the README for
the exact formats.
"""

import argparse
import io
import os
import sys
import tarfile
import urllib.request

GEOM_GCN_BASE = ("https://raw.githubusercontent.com/graphdml-uiuc-jlu/"
                 "geom-gcn/master/new_data")
LINQS_BASE = "https://linqs-data.soe.ucsc.edu/public/lbc"
PUBMED_URL = ("https://linqs-data.soe.ucsc.edu/public/Pubmed-Diabetes.tgz")

WEBKB = {"texas": "texas", "wisconsin": "wisconsin", "cornell": "cornell",
         "actor": "film"}


def fetch(url):
    print("  downloading", url)
    with urllib.request.urlopen(url, timeout=120) as r:
        return r.read()


def write_dataset(out_dir, edges, features, labels):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "edges.tsv"), "w") as f:
        for a, b in edges:
            f.write(f"{a}\t{b}\n")
    n = len(features)
    dim = len(features[0])
    nonzero = sum(1 for row in features for v in row if v != 0.0)
    sparse = nonzero < 0.25 * n * dim
    with open(os.path.join(out_dir, "features.txt"), "w") as f:
        if sparse:
            f.write(f"{n} {dim} --sparse\n")
            for i, row in enumerate(features):
                for j, v in enumerate(row):
                    if v != 0.0:
                        f.write(f"{i} {j} {v:.17g}\n")
        else:
            f.write(f"{n} {dim}\n")
            for row in features:
                f.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    with open(os.path.join(out_dir, "labels.tsv"), "w") as f:
        for node, cls in labels:
            f.write(f"{node}\t{cls}\n")
    print(f"  wrote {out_dir}: n={n} f={dim} edges={len(edges)} "
          f"({'sparse' if sparse else 'dense'} features)")


def convert_geom_gcn(name, remote, out_dir):
    node_text = fetch(f"{GEOM_GCN_BASE}/{remote}/out1_node_feature_label.txt").decode()
    edge_text = fetch(f"{GEOM_GCN_BASE}/{remote}/out1_graph_edges.txt").decode()

    features, labels = [], []
    lines = node_text.strip().splitlines()
    rows = []
    for line in lines[1:]:  # header: node_id feature label
        nid, feat, label = line.strip().split("\t")
        rows.append((int(nid), feat, int(label)))
    rows.sort()
    if remote == "film":
        # the actor graph stores indices of the active words
        dim = 0
        parsed = []
        for nid, feat, label in rows:
            idxs = [int(x) for x in feat.split(",") if x]
            parsed.append((nid, idxs, label))
            dim = max(dim, max(idxs) + 1 if idxs else 0)
        for nid, idxs, label in parsed:
            row = [0.0] * dim
            for j in idxs:
                row[j] = 1.0
            features.append(row)
            labels.append((nid, label))
    else:
        for nid, feat, label in rows:
            features.append([float(x) for x in feat.split(",")])
            labels.append((nid, label))

    edges = []
    for line in edge_text.strip().splitlines()[1:]:  # header: node_id node_id
        a, b = line.split()
        edges.append((int(a), int(b)))
    write_dataset(out_dir, edges, features, labels)


def convert_linqs_content(name, out_dir):
    blob = fetch(f"{LINQS_BASE}/{name}.tgz")
    tf = tarfile.open(fileobj=io.BytesIO(blob))
    content = tf.extractfile(f"{name}/{name}.content").read().decode()
    cites = tf.extractfile(f"{name}/{name}.cites").read().decode()

    node_ids, feats, label_names = [], [], []
    for line in content.strip().splitlines():
        parts = line.strip().split()
        node_ids.append(parts[0])
        feats.append([float(x) for x in parts[1:-1]])
        label_names.append(parts[-1])
    index = {nid: i for i, nid in enumerate(node_ids)}
    classes = {c: i for i, c in enumerate(sorted(set(label_names)))}
    labels = [(i, classes[label_names[i]]) for i in range(len(node_ids))]

    edges, dropped = [], 0
    for line in cites.strip().splitlines():
        a, b = line.split()
        if a in index and b in index:
            edges.append((index[a], index[b]))
        else:
            dropped += 1  # citations to papers outside the content file
    if dropped:
        print(f"  note: dropped {dropped} citation lines referencing unknown ids")
    write_dataset(out_dir, edges, feats, labels)


def convert_pubmed(out_dir):
    blob = fetch(PUBMED_URL)
    tf = tarfile.open(fileobj=io.BytesIO(blob))
    names = tf.getnames()
    node_file = next(n for n in names if n.endswith("Pubmed-Diabetes.NODE.paper.tab"))
    edge_file = next(n for n in names if n.endswith("Pubmed-Diabetes.DIRECTED.cites.tab"))
    node_text = tf.extractfile(node_file).read().decode()
    edge_text = tf.extractfile(edge_file).read().decode()

    lines = node_text.strip().splitlines()
    # line 2 lists the feature vocabulary: "cat=label:label ... numeric:w-..."
    vocab = [tok.split(":")[1] for tok in lines[1].split()[1:]]
    vocab = [w for w in vocab if w != "summary"]
    word_index = {w: i for i, w in enumerate(vocab)}

    node_ids, rows = [], []
    for line in lines[2:]:
        parts = line.strip().split("\t")
        nid = parts[0]
        label = None
        feat = [0.0] * len(word_index)
        for tok in parts[1:]:
            key, _, val = tok.partition("=")
            if key == "label":
                label = int(val) - 1  # classes 1..3 -> 0..2
            elif key in word_index:
                feat[word_index[key]] = float(val)
        node_ids.append(nid)
        rows.append((feat, label))
    index = {nid: i for i, nid in enumerate(node_ids)}
    features = [r[0] for r in rows]
    labels = [(i, r[1]) for i, r in enumerate(rows)]

    edges = []
    for line in edge_text.strip().splitlines()[2:]:
        parts = line.split()
        a = parts[1].split(":")[1]
        b = parts[3].split(":")[1]
        if a in index and b in index:
            edges.append((index[a], index[b]))
    write_dataset(out_dir, edges, features, labels)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--only", default="",
                    help="comma-separated subset of: texas,wisconsin,cornell,"
                         "actor,cora,citeseer,pubmed")
    args = ap.parse_args()
    wanted = set(args.only.split(",")) if args.only else {
        "texas", "wisconsin", "cornell", "actor", "cora", "citeseer", "pubmed"}

    failures = []
    for name in sorted(wanted):
        out_dir = os.path.join(args.out, name)
        print(name)
        try:
            if name in WEBKB:
                convert_geom_gcn(name, WEBKB[name], out_dir)
            elif name in ("cora", "citeseer"):
                convert_linqs_content(name, out_dir)
            elif name == "pubmed":
                convert_pubmed(out_dir)
            else:
                raise ValueError(f"unknown dataset '{name}'")
        except Exception as e:  # keep going; report at the end
            print(f"  FAILED: {e}", file=sys.stderr)
            failures.append(name)
    if failures:
        print("failed:", ", ".join(failures), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
