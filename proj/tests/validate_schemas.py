"""Validates fixtures and CLI outputs against fixtures/schema."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
fx, schema_dir = root / "fixtures", root / "fixtures" / "schema"
registry = Registry()
schemas = {}
for p in sorted(schema_dir.glob("*.schema.json")):
    doc = json.loads(p.read_text())
    registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
    schemas[p.name.removesuffix(".schema.json")] = doc


def check(name, doc, where):
    jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(doc)
    print(f"ok {name}: {where}")


def run(*args):
    return json.loads(subprocess.run([cli, *map(str, args)], check=True, capture_output=True, text=True).stdout)


for name, path in [("kernel", "running_kernel.json"), ("kernel", "running_kernel_refined.json"), ("real_kernel", "running_real.json"),
                   ("graph", "cross_graph.json"), ("family", "canonical_family.json"), ("experiment_config", "experiment.json"),
                   ("experiment_config", "experiment_quick.json")]:
    check(name, json.loads((fx / path).read_text()), path)

k, k2, g = fx / "running_kernel.json", fx / "running_kernel_refined.json", fx / "cross_graph.json"
check("delta_result", run("dist", "--metric", "delta-lp", k, k2), "dist delta-lp")
check("cut_result", run("dist", "--metric", "cutf", k, k), "dist cutf")
check("cut_result", run("cutnorm", fx / "running_real.json"), "cutnorm")
check("graph_overlay_result", run("overlay", "--mode", "graph", k, g), "overlay graph")
check("overlay_result", run("overlay", "--mode", "f", k, k2), "overlay f")
check("truncated_overlay", run("overlay", "--mode", "truncated", k, k2), "overlay truncated")
cloud = run("quotient", k, "--k", "2", "--n", "4")
check("quotient_cloud", cloud, "quotient")
with tempfile.TemporaryDirectory() as tmp:
    c = pathlib.Path(tmp) / "c.json"
    c.write_text(json.dumps(cloud))
    check("hausdorff_result", run("hausdorff", c, c), "hausdorff")
check("sample", run("sample", k, "--n", "5"), "sample")
check("verify_report", run("verify", "--suite", "measures", "--trials", "5"), "verify")
