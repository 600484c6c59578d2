"""Extract a CodeXGLUE-style JSON-lines corpus of documented functions.

Walks the top-level modules of a Python standard library directory and emits
one {"code", "docstring", "func_name", "path"} object per function that has a
docstring and a body of modest length. Output order is deterministic.
"""
import argparse
import ast
import json
import sys
import textwrap
from pathlib import Path


def functions(path):
    source = path.read_text(encoding="utf-8")
    tree = ast.parse(source)
    lines = source.splitlines()
    for node in ast.walk(tree):
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        doc = ast.get_docstring(node)
        if not doc:
            continue
        start = min([d.lineno for d in node.decorator_list] + [node.lineno]) - 1
        body = textwrap.dedent("\n".join(lines[start:node.end_lineno]))
        yield node.name, body, doc


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("stdlib", type=Path)
    parser.add_argument("--limit", type=int, default=650)
    parser.add_argument("--min-lines", type=int, default=4)
    parser.add_argument("--max-lines", type=int, default=30)
    parser.add_argument("--per-module", type=int, default=12)
    args = parser.parse_args()

    emitted = 0
    for path in sorted(args.stdlib.glob("*.py")):
        try:
            found = list(functions(path))
        except (SyntaxError, UnicodeDecodeError):
            continue
        taken = 0
        for name, code, doc in found:
            if taken >= args.per_module:
                break
            n = code.count("\n") + 1
            if not args.min_lines <= n <= args.max_lines:
                continue
            record = {"code": code, "docstring": doc, "func_name": name, "path": path.name}
            sys.stdout.write(json.dumps(record, ensure_ascii=False) + "\n")
            emitted += 1
            taken += 1
            if emitted >= args.limit:
                return


if __name__ == "__main__":
    main()
