"""Line-based kernel scripts.

One command per line, ``#`` comments and blank lines ignored:

    seed <pid> [memory]        create an initial process row
    fork <pids> [fanout]       clone processes, prints the new pids
    kill <pids>                delete process rows
    exit <pids>                same as kill
    getpid                     print pids with a current| indicator
    sleep <pids> <seconds>     accumulate sleep time
    sbrk <pids> <bytes>        grow (or shrink) memory
    chdir <pids> <dir>         replace the cwd| indicator
    wait <pids> [max_polls]    print exited children
    dump P|F <path>            write a table as TSV triples

``<pids>`` is a comma-separated list of integers.
"""

from . import array
from .errors import ParseError, RosaError
from .kernel import KernelState


class ScriptCommandError(RosaError):
    """A well-formed command failed while executing."""

    def __init__(self, line_number, command, cause):
        super().__init__(f"line {line_number}: {command!r}: {cause}")
        self.line_number = line_number
        self.cause = cause


def _parse_pids(text, lineno):
    try:
        return [int(p) for p in text.split(",") if p != ""]
    except ValueError:
        raise ParseError(lineno, f"bad pid list {text!r}") from None


def _parse_number(text, lineno):
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            raise ParseError(lineno, f"bad number {text!r}") from None


def parse_script(lines):
    """Parse into (line_number, command, args) tuples; raises ParseError."""
    parsed = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        cmd, args = fields[0], fields[1:]
        if cmd == "seed":
            if len(args) not in (1, 2):
                raise ParseError(lineno, "seed takes <pid> [memory]")
            try:
                pid = int(args[0])
            except ValueError:
                raise ParseError(lineno, f"bad pid {args[0]!r}") from None
            mem = _parse_number(args[1], lineno) if len(args) == 2 else None
            parsed.append((lineno, cmd, (pid, mem)))
        elif cmd in ("fork",):
            if len(args) not in (1, 2):
                raise ParseError(lineno, "fork takes <pids> [fanout]")
            pids = _parse_pids(args[0], lineno)
            fanout = 1
            if len(args) == 2:
                try:
                    fanout = int(args[1])
                except ValueError:
                    raise ParseError(lineno,
                                     f"bad fanout {args[1]!r}") from None
            parsed.append((lineno, cmd, (pids, fanout)))
        elif cmd in ("kill", "exit"):
            if len(args) != 1:
                raise ParseError(lineno, f"{cmd} takes <pids>")
            parsed.append((lineno, cmd, (_parse_pids(args[0], lineno),)))
        elif cmd == "getpid":
            if args:
                raise ParseError(lineno, "getpid takes no arguments")
            parsed.append((lineno, cmd, ()))
        elif cmd in ("sleep", "sbrk"):
            if len(args) != 2:
                raise ParseError(lineno, f"{cmd} takes <pids> <n>")
            parsed.append((lineno, cmd, (_parse_pids(args[0], lineno),
                                         _parse_number(args[1], lineno))))
        elif cmd == "chdir":
            if len(args) != 2:
                raise ParseError(lineno, "chdir takes <pids> <dir>")
            parsed.append((lineno, cmd, (_parse_pids(args[0], lineno),
                                         args[1])))
        elif cmd == "wait":
            if len(args) not in (1, 2):
                raise ParseError(lineno, "wait takes <pids> [max_polls]")
            pids = _parse_pids(args[0], lineno)
            polls = 100
            if len(args) == 2:
                try:
                    polls = int(args[1])
                except ValueError:
                    raise ParseError(lineno,
                                     f"bad poll count {args[1]!r}") from None
            parsed.append((lineno, cmd, (pids, polls)))
        elif cmd == "dump":
            if len(args) != 2 or args[0] not in ("P", "F"):
                raise ParseError(lineno, "dump takes P|F <path>")
            parsed.append((lineno, cmd, (args[0], args[1])))
        else:
            raise ParseError(lineno, f"unknown command {cmd!r}")
    return parsed


def run_script(lines, state=None, emit=None):
    """Execute parsed commands against a (fresh) KernelState.

    ``emit`` receives one result line per command that produces output.
    Raises ParseError on malformed input and ScriptCommandError when a
    command fails at runtime.
    """
    state = state or KernelState()
    emit = emit or (lambda text: None)
    for lineno, cmd, args in parse_script(lines):
        try:
            if cmd == "seed":
                pid, mem = args
                state.spawn(pid=pid, memory=mem)
                emit(f"seed -> {pid}")
            elif cmd == "fork":
                pids, fanout = args
                new = state.fork(pids, fanout=fanout)
                emit("fork -> " + ",".join(str(p) for p in new))
            elif cmd in ("kill", "exit"):
                state.kill(args[0])
                emit(f"{cmd} -> ok")
            elif cmd == "getpid":
                emit("getpid -> " +
                     ",".join(str(p) for p in state.getpid()))
            elif cmd == "sleep":
                state.sleep(args[0], args[1])
                emit("sleep -> ok")
            elif cmd == "sbrk":
                state.sbrk(args[0], args[1])
                emit("sbrk -> ok")
            elif cmd == "chdir":
                state.chdir(args[0], args[1])
                emit("chdir -> ok")
            elif cmd == "wait":
                exited = state.wait_children(args[0], max_polls=args[1])
                emit("wait -> " + ",".join(str(p) for p in exited))
            elif cmd == "dump":
                table = state.P if args[0] == "P" else state.F
                array.save_tsv(table, args[1])
                emit(f"dump {args[0]} -> {args[1]}")
        except RosaError as exc:
            raise ScriptCommandError(lineno, cmd, exc) from exc
        except ValueError as exc:
            raise ScriptCommandError(lineno, cmd, exc) from exc
    return state
