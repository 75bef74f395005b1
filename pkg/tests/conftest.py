import io
import pathlib
import sys
from contextlib import redirect_stderr, redirect_stdout

ROOT = pathlib.Path(__file__).resolve().parent.parent
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from hypothesis import settings  # noqa: E402

from alda.runtime import run_text  # noqa: E402

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

CORPUS = SRC / "alda" / "corpus"
DATA = pathlib.Path(__file__).resolve().parent / "data"


def run_program(src: str, **kw):
    """Execute source; (printed output, finished interpreter)."""
    out = io.StringIO()
    interp = run_text(src, out=out, **kw)
    return out.getvalue(), interp


def cli(*argv: str):
    """Invoke the command line in-process; (exit code, stdout, stderr)."""
    from alda.cli import main

    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        try:
            code = main(list(argv))
        except SystemExit as e:  # argparse usage failures
            code = e.code if isinstance(e.code, int) else 3
    return code, out.getvalue(), err.getvalue()
