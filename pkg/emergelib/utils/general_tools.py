"""
(C) Copyright 2026 emergelib contributors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.

Created on Oct 02, 2026

General (i.e. non-scientific) utils used throughout the package.
"""
import json

import numpy as np


def create_repr_string(o):
    """

    Args:
        o (object): any core object

    Returns:
        str: repr string based on internal attributes
    """
    # Filter peripheral unimportant attribute names:
    params = [
        attr for attr in vars(o) if not attr.startswith('_')  # Private state
                                    and not attr.endswith("_")  # Remove attributes stated after fitting
                                    and not callable(getattr(o, attr))
    ]
    params = [(attr, getattr(o, attr)) for attr in params]
    params_string = ", ".join("{}={!r}".format(*param) for param in params)
    repr_string = "{cls_name}({params})".format(cls_name=o.__class__.__name__,
                                                params=params_string)
    return repr_string


def to_builtin(obj):
    """Recursively convert numpy containers and scalars to JSON-serializable builtins.

    Floats are kept at full precision (`json` writes the shortest round-tripping repr).
    """
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "to_dict"):
        return to_builtin(obj.to_dict())
    return obj


def dumps_line(record):
    """One JSONL line (no trailing newline), keys in insertion order."""
    return json.dumps(to_builtin(record), allow_nan=False)


def write_jsonl(path, records, mode="w"):
    """Write an iterable of dict records as JSON lines.

    Args:
        path (str | os.PathLike): Destination file.
        records (Iterable[dict]): Records to write.
        mode (str): "w" to overwrite, "a" to append.

    Returns:
        int: Number of written records.
    """
    n = 0
    with open(path, mode, encoding="utf-8") as f:
        for record in records:
            f.write(dumps_line(record) + "\n")
            n += 1
    return n


def read_jsonl(path):
    """Read JSON lines into a list of dicts (empty lines are ignored)."""
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
