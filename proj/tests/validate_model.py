"""Trains a small model with the CLI and validates it against the schema."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

lace, schema_path = sys.argv[1], sys.argv[2]
with tempfile.TemporaryDirectory() as d:
    d = pathlib.Path(d)
    subprocess.run([lace, "synth", "--scenario", "straight-east", "--agents", "40", "-o", d / "t.csv"], check=True)
    subprocess.run([lace, "train", "-i", d / "t.csv", "--k", "15", "-o", d / "m.json"], check=True)
    model = json.loads((d / "m.json").read_text())
schema = json.loads(pathlib.Path(schema_path).read_text())
jsonschema.validate(model, schema)
print("model validates against", schema_path)
