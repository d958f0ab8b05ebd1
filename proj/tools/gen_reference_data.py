#!/usr/bin/env python3
"""Writes the bundled reference cluster and scenario files into data/."""

import argparse
import json
import pathlib

FAMILIES = ["convnext", "efficientnet", "resnet", "swin", "densenet"]


def servers(n_sites, per_site, mem_gib):
    out = []
    for s in range(n_sites):
        for j in range(per_site):
            out.append({
                "server_id": f"s{s + 1:02d}-{j + 1:02d}",
                "site_id": f"site{s + 1:02d}",
                "mem_gib": mem_gib,
                "compute": mem_gib / 16.0,
                "server_class": "a2",
            })
    return out


def cluster(n_sites, per_site, mem_gib, count, families):
    return {
        "schema_version": 1,
        "servers": servers(n_sites, per_site, mem_gib),
        "app_mix": {
            "count": count,
            "families": families,
            "primary_variant": "largest",
            "id_prefix": "app",
        },
    }


def write(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--large-mem-gib", type=float, default=26.0)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    write(out / "testbed6_cluster.json", cluster(3, 2, 16, 46, FAMILIES))
    write(out / "large100_cluster.json", cluster(10, 10, args.large_mem_gib, 640, FAMILIES))

    base = {
        "schema_version": 1,
        "catalog": "catalog.json",
        "policy": "faillite",
        "k_fraction": 0.5,
        "alpha": 0.1,
        "headroom": 0.2,
        "notify_ms": 10,
        "detector": {"period_ms": 20, "check_interval_ms": 100, "check_phase_ms": 0, "missed_periods": 2},
        "horizon_ms": 10000,
    }
    write(out / "testbed6.json", {
        **base,
        "name": "testbed6",
        "cluster": "testbed6_cluster.json",
        "seed": 1,
        "repeats": 6,
        "injections": [{"kind": "server_failure", "time_ms": 1000, "pick": "rotate", "count": 1}],
    })
    large = {
        **base,
        "cluster": "large100_cluster.json",
        "site_independence": True,
        "partial_k": True,
        "seed": 1,
        "repeats": 3,
    }
    write(out / "large100_headroom.json", {
        **large,
        "name": "large100-headroom",
        "headroom": 0.1,
        "injections": [{"kind": "site_failure", "time_ms": 1000, "pick": "random", "count": 5}],
    })
    write(out / "large100_sites.json", {
        **large,
        "name": "large100-sites",
        "headroom": 0.07,
        "k_fraction": 0.25,
        "injections": [{"kind": "site_failure", "time_ms": 1000, "pick": "random", "count": 5}],
    })


if __name__ == "__main__":
    main()
