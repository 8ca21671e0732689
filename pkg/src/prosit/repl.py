"""Command-line front end.

The session starts in assert mode focused on ``top``.  A bare ``?`` switches
to query mode and a bare ``!`` back to assert mode.  After a ``yes`` in query
mode, a line holding just ``;`` asks for the next solution.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Iterator, Optional, TextIO

from .engine import DEFAULT_DEPTH, Engine, Verdict
from .errors import BuiltinError, PrositError, ReaderError
from .reader import Expression, ModeSwitch, Param, read, to_text, tokenize
from .store import Situation

ASSERT, QUERY = "assert", "query"


class SessionExit(Exception):
    """Raised by ``(exit)``."""


def format_bindings(bindings: dict) -> str:
    return ", ".join(f"{name} = {to_text(value)}" for name, value in bindings.items())


def _open_depth(text: str) -> int:
    depth = 0
    for tok in tokenize(text):
        if tok.kind == "open":
            depth += 1
        elif tok.kind == "close":
            depth -= 1
    return depth


class Session:
    def __init__(self, engine: Optional[Engine] = None, *, out: Optional[TextIO] = None,
                 err: Optional[TextIO] = None, inp: Optional[TextIO] = None,
                 batch: bool = False, duals: bool = False):
        self.engine = engine or Engine()
        self.engine.session = self
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.inp = inp
        self.batch = batch
        self.duals = duals
        self.mode = ASSERT
        self.focus: list[Situation] = [self.engine.store.top]
        self.errors = 0
        self._pending: Optional[Iterator[dict]] = None
        self._buffer = ""
        self._dirs: list[Path] = []

    # -- state ---------------------------------------------------------------

    @property
    def current(self) -> Situation:
        return self.focus[-1]

    @property
    def prompt(self) -> str:
        return self.current.path + ("?> " if self.mode == QUERY else "> ")

    def enter(self, sit: Situation) -> None:
        self.focus.append(sit)

    def leave(self) -> None:
        if len(self.focus) == 1:
            self.err.write("warning: already at top\n")
            return
        self.focus.pop()

    def write(self, line: str) -> None:
        self.out.write(line + "\n")

    # -- evaluation --------------------------------------------------------------

    def read_eval_print(self, line: str) -> bool:
        """Feed one line of input; False while a form is still incomplete."""
        if not self._buffer and line.strip() == ";":
            self._next_solution()
            return True
        text = self._buffer + line + "\n"
        try:
            if _open_depth(text) > 0:
                self._buffer = text
                return False
        except ReaderError as exc:
            self._buffer = ""
            self._report(exc, text)
            return True
        self._buffer = ""
        self.eval_text(text)
        return True

    def eval_text(self, text: str) -> None:
        try:
            forms = read(text)
        except ReaderError as exc:
            self._report(exc, text)
            return
        for form in forms:
            self.eval_form(form)

    def eval_form(self, form: Expression | ModeSwitch) -> None:
        self._drop_pending()
        try:
            if isinstance(form, ModeSwitch):
                self.mode = QUERY if form.mode == "?" else ASSERT
            elif self.mode == ASSERT:
                self.engine.tell(form, self.current)
            else:
                self._query(form)
        except SessionExit:
            raise
        except PrositError as exc:
            self._report(exc)
        except RecursionError:
            self._report(PrositError(f"recursion too deep while evaluating {to_text(form)}"))

    def _query(self, form: Expression) -> None:
        engine, sit = self.engine, self.current
        stream = engine.ask(form, sit)
        first = next(stream, None)
        if self.duals:
            answer = engine.query_dual(form, sit)
            verdict = answer.verdict
        else:
            verdict = Verdict.YES if first is not None else Verdict.UNKNOWN
        self._answer(verdict, first or {})
        if first is not None:
            self._pending = stream
        else:
            stream.close()

    def _answer(self, verdict: Verdict, bindings: dict) -> None:
        text = verdict.value + "."
        if bindings:
            if self.batch:
                text += " " + format_bindings(bindings)
            else:
                for name, value in bindings.items():
                    self.write(f"{name} = {to_text(value)}")
        self.write(text)

    def _next_solution(self) -> None:
        stream = self._pending
        if stream is None:
            self.write("no pending query.")
            return
        try:
            answer = next(stream, None)
        except PrositError as exc:
            self._drop_pending()
            self._report(exc)
            return
        if answer is None:
            self._drop_pending()
            self.write("no more solutions.")
        else:
            self._answer(Verdict.YES, answer)

    def _drop_pending(self) -> None:
        if self._pending is not None:
            self._pending.close()
            self._pending = None

    def _report(self, exc: Exception, source: Optional[str] = None) -> None:
        self.errors += 1
        self.err.write(f"error: {exc}\n")
        if isinstance(exc, ReaderError) and source is not None:
            start = exc.span[0]
            line_start = source.rfind("\n", 0, start) + 1
            line_end = source.find("\n", start)
            if line_end < 0:
                line_end = len(source)
            self.err.write("  " + source[line_start:line_end] + "\n")
            self.err.write("  " + " " * (start - line_start) + "^\n")

    # -- input loops -------------------------------------------------------------

    def run_file(self, path: str | Path) -> None:
        """Evaluate a program file; it starts in assert mode and the mode is restored after."""
        path = Path(path)
        text = path.read_text()
        saved = self.mode
        self.mode = ASSERT
        self._dirs.append(path.resolve().parent)
        try:
            self.eval_text(text)
        finally:
            self._dirs.pop()
            self.mode = saved

    def _locate(self, name: str) -> Path:
        """Relative names are taken relative to the file being loaded, if any."""
        path = Path(name)
        if not path.is_absolute() and self._dirs:
            return self._dirs[-1] / path
        return path

    def run_stream(self, inp: TextIO, interactive: bool = False) -> None:
        while True:
            if interactive:
                self.out.write(self.prompt if not self._buffer else "... ")
                self.out.flush()
            line = inp.readline()
            if not line:
                if self._buffer:
                    self.eval_text(self._buffer)
                    self._buffer = ""
                return
            try:
                self.read_eval_print(line.rstrip("\n"))
            except SessionExit:
                return

    # -- session commands (called from builtins) -----------------------------------

    def cmd_load(self, args, sit) -> None:
        path = self._locate(_path_arg(args[0]))
        try:
            self.run_file(path)
        except OSError as exc:
            raise BuiltinError(f"cannot read {path}: {exc.strerror}") from None

    def cmd_demo(self, args, sit) -> None:
        path = self._locate(_path_arg(args[0]))
        try:
            forms = read(Path(path).read_text())
        except OSError as exc:
            raise BuiltinError(f"cannot read {path}: {exc.strerror}") from None
        saved = self.mode
        self.mode = ASSERT
        try:
            for form in forms:
                self.write(self.prompt + to_text(form))
                if not self.batch and self.inp is not None:
                    self.inp.readline()
                self.eval_form(form)
        finally:
            self.mode = saved

    def cmd_printsit(self, args, sit) -> None:
        target = sit
        if args:
            name = args[0]
            if not isinstance(name, Param):
                raise BuiltinError(f"printsit needs a situation name, got {to_text(name)}")
            target = self.engine.store.resolve(sit, name, create=False)
            if target is None:
                raise BuiltinError(f"no situation {name.name} in {sit.path}")
        for line in self.engine.store.printsit(target):
            self.write(line)

    def cmd_trace(self, args, sit) -> None:
        on = _flag(args, self.engine.trace_stream is None)
        self.engine.trace_stream = self.err if on else None

    def cmd_duals(self, args, sit) -> None:
        self.duals = _flag(args, not self.duals)

    def cmd_exit(self, args, sit) -> None:
        raise SessionExit()

    def cmd_run(self, args, sit) -> None:
        """A nested sub-session over the same store, with a fresh focus stack."""
        inner = Session(self.engine, out=self.out, err=self.err, inp=self.inp,
                        batch=self.batch, duals=self.duals)
        try:
            if self.inp is not None:
                inner.run_stream(self.inp, interactive=not self.batch)
        finally:
            self.errors += inner.errors
            self.engine.session = self


def _path_arg(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, Param):
        return x.name
    raise BuiltinError(f"expected a file name, got {to_text(x)}")


def _flag(args, default: bool) -> bool:
    if not args:
        return default
    x = args[0]
    if isinstance(x, Param) and x.name.lower() in ("on", "true", "yes"):
        return True
    if isinstance(x, Param) and x.name.lower() in ("off", "false", "no"):
        return False
    raise BuiltinError(f"expected on or off, got {to_text(x)}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prosit", description="Situation-theoretic logic programming interpreter.")
    p.add_argument("--load", action="append", default=[], metavar="FILE",
                   help="evaluate a program file (repeatable, in order)")
    p.add_argument("--eval", action="append", default=[], metavar="FORM",
                   help="evaluate FORM in query mode and print its verdict")
    p.add_argument("--batch", action="store_true", help="no prompt; one verdict per line")
    p.add_argument("--trace", action="store_true", help="trace goals on stderr")
    p.add_argument("--duals", action="store_true", help="four-valued answers")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="backward-chaining depth bound")
    p.add_argument("--puzzle", metavar="NAME", help="run a corpus puzzle and check its expected answers")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.depth < 1:
        print("prosit: --depth must be positive", file=sys.stderr)
        return 2
    if args.puzzle:
        from .corpus.harness import run_puzzle
        try:
            return run_puzzle(args.puzzle, sys.stdout)
        except ValueError as exc:
            print(f"prosit: {exc}", file=sys.stderr)
            return 2
    engine = Engine(depth_limit=args.depth, trace=sys.stderr if args.trace else None)
    session = Session(engine, inp=sys.stdin, batch=args.batch, duals=args.duals)
    try:
        for path in args.load:
            try:
                session.run_file(path)
            except OSError as exc:
                print(f"prosit: cannot read {path}: {exc.strerror}", file=sys.stderr)
                return 2
        if args.eval:
            session.mode = "query"
            for text in args.eval:
                session.eval_text(text)
        elif args.batch and not args.load:
            session.run_stream(sys.stdin)
        elif not args.batch:
            try:
                import readline  # noqa: F401  line editing when available
            except ImportError:
                pass
            session.run_stream(sys.stdin, interactive=sys.stdin.isatty())
    except SessionExit:
        pass
    except KeyboardInterrupt:
        sys.stdout.write("\n")
        return 130
    if session.errors and (args.batch or args.eval):
        return 1
    return 0
