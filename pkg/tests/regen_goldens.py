"""Rewrite the CLI goldens: ``python3 tests/regen_goldens.py`` from the repo root."""
import io
from pathlib import Path

from weightglue.cli import execute

from golden_cases import CASES

HERE = Path(__file__).parent

if __name__ == "__main__":
    for name, argv in CASES.items():
        buf = io.StringIO()
        code = execute(argv + ["--json"], out=buf)
        (HERE / "goldens" / f"{name}.json").write_text(buf.getvalue())
        print(name, code)
