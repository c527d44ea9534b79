"""Batch front end: one subcommand per library operation, JSON (or CSV) on stdout.

Exit codes: 0 ok, 1 I/O, 2 invalid input, 3 domain error. Failures print a
single JSON line on stderr.
"""
from __future__ import annotations

import argparse
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from scripts import codec
from scripts.errors import InputOutputError, SaltosError, SchemaError
from scripts.index_sets import ALL, IndexInterval, IndexSetExpr, index_set_from_dict
from scripts.intervals import IntervalSpec
from scripts.jump_measure import (
    PhiSpec,
    count_via_stopping_times,
    cumulative_jump_function,
    jump_counting_measure,
    jump_measure_additivity_check,
    phi_sum_of_jumps,
)
from scripts.path_sim import census_to_csv, empirical_jump_census, simulate, stopping_times
from scripts.regulated_core import (
    eval_at,
    jump_process,
    jumps_at_least,
    layered_partition,
    left_limit,
    right_limit,
    strip_partition,
    validate,
)
from scripts.settings import get_settings
from scripts.unordered_sum import unordered_sum
from scripts.utils.logger import log


class _Parser(argparse.ArgumentParser):
    """argparse that raises SchemaError instead of printing usage and exiting."""

    def error(self, message: str):
        raise SchemaError(f"{self.prog}: {message}")


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _window(args: argparse.Namespace) -> Optional[IntervalSpec]:
    if args.window is None:
        return None
    a, b = args.window
    return IntervalSpec.window(a, b, open_left=args.open_left, open_right=args.open_right)


def _time_set(args: argparse.Namespace) -> IndexSetExpr:
    """--set FILE wins; otherwise --window a b read as (a, b]."""
    if args.set:
        return index_set_from_dict(codec.load_json(args.set))
    if args.window is None:
        raise SchemaError("give --window a b or --set FILE")
    a, b = args.window
    return IndexInterval(a, b, open_left=True, open_right=False)


def _fn(args: argparse.Namespace, *, strict: bool = True):
    return codec.function_from_dict(codec.load_json(args.fn), strict=strict)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_eval(args) -> Any:
    f = _fn(args)
    return {"t": args.t, "value": eval_at(f, args.t, args.tol)}


def cmd_limits(args) -> Any:
    f = _fn(args)
    t = args.t
    left = left_limit(f, t, args.tol) if f.domain.has_left_neighborhood(t) else None
    right = right_limit(f, t, args.tol) if f.domain.has_right_neighborhood(t) else None
    return {"t": t, "left": left, "value": eval_at(f, t, args.tol), "right": right, "jump": jump_process(f, t)}


def cmd_jumps(args) -> Any:
    return [[loc, jump] for loc, jump in jumps_at_least(_fn(args), args.eps, _window(args))]


def cmd_partition(args) -> Any:
    f = _fn(args)
    if args.strips:
        return strip_partition(f, _window(args), args.depth).to_dict()
    return layered_partition(f, _window(args), args.depth).to_dict()


def cmd_sum_jumps(args) -> Any:
    return phi_sum_of_jumps(_fn(args), PhiSpec.parse(args.phi), _time_set(args), args.tol).to_dict()


def cmd_sum(args) -> Any:
    family = codec.family_from_dict(codec.load_json(args.weights))
    A = index_set_from_dict(codec.load_json(args.set)) if args.set else ALL
    return unordered_sum(family, A, args.tol).to_dict()


def cmd_cumulate(args) -> Any:
    g = cumulative_jump_function(codec.family_from_dict(codec.load_json(args.weights)), args.tol)
    payload: Dict[str, Any] = {"fn": codec.function_to_dict(g)}
    if args.at:
        payload["values"] = [[t, eval_at(g, t, args.tol)] for t in args.at]
    return payload


def _path(args):
    return codec.path_from_json(codec.load_json(args.path))


def cmd_count(args) -> Any:
    path = _path(args)
    rects = codec.rectangles_from_json(codec.load_json(args.rect))
    if len(rects) > 1:
        return jump_measure_additivity_check(path, rects).to_dict()
    if args.via == "stopping-times":
        return {"count": count_via_stopping_times(path, rects[0])}
    return {"count": jump_counting_measure(path, rects[0])}


def cmd_stopping_times(args) -> Any:
    return stopping_times(_path(args)).to_dict()


def cmd_simulate(args) -> Any:
    model = codec.model_from_dict(codec.load_json(args.model), seed=args.seed)
    return codec.path_to_dict(simulate(model))


def cmd_census(args) -> Any:
    model = codec.model_from_dict(codec.load_json(args.model), seed=args.seed)
    rect = codec.rectangles_from_json(codec.load_json(args.rect))[0]
    result = empirical_jump_census(model, args.seeds, rect, workers=args.workers)
    if args.csv:
        return census_to_csv(result)
    return result.to_dict()


def cmd_validate(args) -> Any:
    report = validate(_fn(args, strict=False))
    args.exit_status = 0 if report.ok else 2
    return report.to_dict()


def cmd_serve(args) -> Any:
    import uvicorn

    settings = get_settings()
    uvicorn.run("app.api:app", host=args.host or settings.api_host, port=args.port or settings.api_port,
                reload=False, access_log=False)
    return None


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_window(p: argparse.ArgumentParser, help_text: str = "Janela [a, b] (use 'inf' para ilimitado)") -> None:
    p.add_argument("--window", nargs=2, type=_number, metavar=("A", "B"), default=None, help=help_text)
    p.add_argument("--open-left", action="store_true", help="Janela aberta à esquerda")
    p.add_argument("--open-right", action="store_true", help="Janela aberta à direita")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="saltos", description="Funções reguladas, somas não ordenadas e medidas de saltos")
    parser.add_argument("--out", default=None, help="Grava o resultado neste arquivo em vez do stdout")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(handler=handler)
        return p

    p = verb("eval", cmd_eval, "Valor f(t)")
    p.add_argument("--fn", required=True, help="JSON da função")
    p.add_argument("--t", type=_number, required=True, help="Ponto de avaliação")
    p.add_argument("--tol", type=_number, default=None, help="Tolerância da cauda (padrão do config.json)")

    p = verb("limits", cmd_limits, "Limites laterais f(t-), f(t+) e o salto em t")
    p.add_argument("--fn", required=True, help="JSON da função")
    p.add_argument("--t", type=_number, required=True, help="Ponto")
    p.add_argument("--tol", type=_number, default=None, help="Tolerância da cauda")

    p = verb("jumps", cmd_jumps, "Saltos com |Δf| >= eps na janela")
    p.add_argument("--fn", required=True, help="JSON da função")
    p.add_argument("--eps", type=_number, required=True, help="Limiar eps > 0")
    _add_window(p)
    p.add_argument("--csv", action="store_true", help="Saída em CSV (loc,jump)")

    p = verb("partition", cmd_partition, "Partição em camadas finitas dos pontos de salto")
    p.add_argument("--fn", required=True, help="JSON da função")
    p.add_argument("--depth", type=int, default=None, help="Profundidade materializada")
    p.add_argument("--strips", action="store_true", help="Construção por faixas unitárias da semirreta")
    _add_window(p)

    p = verb("sum-jumps", cmd_sum_jumps, "Soma de Φ(|Δf(s)|) sobre s em B")
    p.add_argument("--fn", required=True, help="JSON da função")
    p.add_argument("--phi", default="power:1", help="power:<p>, bounded ou expm")
    p.add_argument("--set", default=None, help="JSON do conjunto B (alternativa a --window)")
    p.add_argument("--window", nargs=2, type=_number, metavar=("A", "B"), default=None, help="B = (a, b]")
    p.add_argument("--tol", type=_number, default=None, help="Tolerância")

    p = verb("sum", cmd_sum, "Soma não ordenada de uma família de pesos sobre A")
    p.add_argument("--weights", required=True, help="JSON da família de pesos")
    p.add_argument("--set", default=None, help="JSON do conjunto de índices A (padrão: todos)")
    p.add_argument("--tol", type=_number, default=None, help="Tolerância")

    p = verb("cumulate", cmd_cumulate, "Função cumulativa de saltos g(t) = Σ_{0<s<=t} h(s)")
    p.add_argument("--weights", required=True, help="JSON da família de pesos")
    p.add_argument("--at", nargs="*", type=_number, default=None, help="Pontos onde avaliar g")
    p.add_argument("--tol", type=_number, default=None, help="Tolerância")

    p = verb("count", cmd_count, "Medida de contagem de saltos j_X(B × Λ)")
    p.add_argument("--path", required=True, help="JSON da trajetória (saída de simulate) ou da função")
    p.add_argument("--rect", required=True, help="JSON do retângulo (ou lista de retângulos disjuntos)")
    p.add_argument("--via", choices=("direct", "stopping-times"), default="direct", help="Rota de contagem")

    p = verb("stopping-times", cmd_stopping_times, "Enumeração crescente dos instantes de salto")
    p.add_argument("--path", required=True, help="JSON da trajetória")

    p = verb("simulate", cmd_simulate, "Simula uma trajetória regulada")
    p.add_argument("--model", required=True, help="JSON do modelo")
    p.add_argument("--seed", type=int, required=True, help="Semente (obrigatória)")

    p = verb("census", cmd_census, "Contagens j_X sobre várias sementes")
    p.add_argument("--model", required=True, help="JSON do modelo")
    p.add_argument("--rect", required=True, help="JSON do retângulo")
    p.add_argument("--seeds", type=int, required=True, help="Número de sementes")
    p.add_argument("--seed", type=int, required=True, help="Primeira semente")
    p.add_argument("--workers", type=int, default=None, help="Processos paralelos (padrão do config.json)")
    p.add_argument("--csv", action="store_true", help="Saída em CSV (seed,count)")

    p = verb("validate", cmd_validate, "Verifica os invariantes de uma função")
    p.add_argument("--fn", required=True, help="JSON da função")

    p = verb("serve", cmd_serve, "Sobe a API HTTP (uvicorn)")
    p.add_argument("--host", default=None, help="Host do servidor uvicorn")
    p.add_argument("--port", type=int, default=None, help="Porta do servidor uvicorn")
    return parser


def _render(args: argparse.Namespace, result: Any) -> str:
    if isinstance(result, str):
        return result
    if args.verb == "jumps" and getattr(args, "csv", False):
        lines = ["loc,jump"] + [f"{loc!r},{jump!r}" for loc, jump in result]
        return "\n".join(lines) + "\n"
    return codec.dumps(result) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    args: Optional[argparse.Namespace] = None
    try:
        args = build_parser().parse_args(argv)
        args.exit_status = 0
        log("cli", "INFO", "command_start", verb=args.verb)
        result = args.handler(args)
        if result is not None:
            text = _render(args, result)
            if args.out:
                codec.write_text(args.out, text)
            else:
                sys.stdout.write(text)
        log("cli", "INFO", "command_done", verb=args.verb, exit_status=args.exit_status)
        return args.exit_status
    except SaltosError as exc:
        return _fail(args, exc)
    except OSError as exc:
        return _fail(args, InputOutputError(str(exc)))
    except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
        # malformed documents that slipped past the schema checks
        return _fail(args, SchemaError(f"{type(exc).__name__}: {exc}"))


def _fail(args: Optional[argparse.Namespace], exc: SaltosError) -> int:
    log("cli", "ERROR", "command_failed", verb=getattr(args, "verb", None), error=exc.to_dict())
    sys.stderr.write(codec.error_document(exc) + "\n")
    return exc.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
