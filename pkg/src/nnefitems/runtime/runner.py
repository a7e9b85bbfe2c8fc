"""Concurrent execution of an item set, one thread per item."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..errors import DeadlockDetected, EvaluationError, MissingInput, NnefError, ShapeUnsupported
from ..frontend.program import Instruction, ItemProgram
from ..petri.coloured import sync_name
from ..tensor.evaluate import apply, declare
from ..trace import Trace, TraceEvent
from .noise import START, NoisePoint
from .store import RunAborted, SharedStore

BARRIER_TIMEOUT_S = 60.0


@dataclass
class RunResult:
    outputs: dict[str, np.ndarray]
    trace: Trace


class _Collector:
    """Serialises trace appends; the timestamp is taken under the lock."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.events: list[TraceEvent] = []
        self.rendezvous: list[tuple[str, int]] = []

    def log(self, item: str, transition: str, kind: str) -> None:
        with self._lock:
            self.events.append(TraceEvent(item, transition, kind, time.monotonic_ns()))

    def meet(self, name: str) -> None:
        with self._lock:
            self.rendezvous.append((name, time.monotonic_ns()))

    def trace(self) -> Trace:
        return Trace(list(self.events), list(self.rendezvous))


class _Worker:
    def __init__(
        self,
        item: ItemProgram,
        store: SharedStore,
        log: _Collector,
        inputs: Mapping[str, np.ndarray],
        weights: Mapping[str, np.ndarray],
        noise: NoisePoint | None,
    ) -> None:
        self.item = item
        self.store = store
        self.log = log
        self.inputs = inputs
        self.weights = weights
        self.noise = noise
        self.env: dict[str, np.ndarray] = {}

    def pause(self, point: str) -> None:
        if self.noise is not None and self.noise.after == point and self.noise.delay_ms:
            time.sleep(self.noise.delay_ms / 1000.0)

    def step(self, index: int, inst: Instruction) -> None:
        item = self.item.item_id
        point = inst.result
        if inst.is_declaration:
            self.env[inst.result] = declare(inst, self.inputs, self.weights)
        elif inst.op == "variablesync":
            return
        elif inst.op == "get_var":
            self.env[inst.result] = self.store.read(inst.arg("data").name, item)
        elif inst.op == "send_var":
            point = sync_name(inst.result)
            self.log.log(item, point, "start")
            self.store.write(inst.result, self.env[inst.arg("data").name], item)
            self.log.log(item, point, "end")
        else:
            self.log.log(item, inst.result, "start")
            try:
                self.env[inst.result] = apply(inst, self.env)
            except NnefError as exc:
                raise EvaluationError(index, inst.result, exc) from exc
            self.log.log(item, inst.result, "end")
        self.pause(point)

    def run(self, instructions: Sequence[tuple[int, Instruction]]) -> None:
        for index, inst in instructions:
            self.step(index, inst)


def _check_inputs(items: Sequence[ItemProgram], inputs: Mapping[str, np.ndarray]) -> None:
    for item in items:
        for inst in item.declarations():
            if inst.op == "external" and inst.result not in inputs:
                raise MissingInput(f"no tensor supplied for external {inst.result} (item {item.item_id})")


def _make_store(items: Sequence[ItemProgram]) -> SharedStore:
    store = SharedStore(workers=len(items))
    for item in items:
        for inst in item.sends():
            store.declare(inst.result, item.item_id, (d.name for d in inst.arg("dest")))
    return store


def _outputs(items: Sequence[ItemProgram], workers: Sequence[_Worker]) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for item, worker in zip(items, workers):
        for name in item.graph_outputs:
            producer = item.producer(name)
            if producer is not None and producer.op != "get_var" and name in worker.env:
                out[name] = worker.env[name]
    return out


def _launch(bodies: Sequence[Callable[[], None]], names: Sequence[str], on_exit: Callable[[str, BaseException | None], None]):
    errors: dict[str, BaseException] = {}

    def wrap(body, name):
        def target():
            failure: BaseException | None = None
            try:
                body()
            except BaseException as exc:  # reported to the caller below
                failure = exc
                errors[name] = exc
            finally:
                on_exit(name, failure)

        return target

    threads = [threading.Thread(target=wrap(b, n), name=f"item-{n}", daemon=True) for b, n in zip(bodies, names)]
    for t in threads:
        t.start()
    return threads, errors


def _raise_first(names: Sequence[str], errors: Mapping[str, BaseException]) -> None:
    ranked = [errors[n] for n in names if n in errors]
    for exc in ranked:
        if not isinstance(exc, (DeadlockDetected, RunAborted)):
            raise exc
    for exc in ranked:
        if isinstance(exc, DeadlockDetected):
            raise exc
    if ranked:
        raise ranked[0]


def run_items(
    items: Sequence[ItemProgram],
    inputs: Mapping[str, np.ndarray],
    weights: Mapping[str, np.ndarray],
    noise: Mapping[str, NoisePoint] | None = None,
) -> RunResult:
    """Run every item as an independent sequential worker.

    ``get_var`` blocks until the writer publishes.  Raises DeadlockDetected
    when all live workers wait on variables nobody will write.
    """
    items = list(items)
    noise = noise or {}
    _check_inputs(items, inputs)
    store = _make_store(items)
    log = _Collector()
    workers = [_Worker(it, store, log, inputs, weights, noise.get(it.item_id)) for it in items]

    def body(worker: _Worker):
        def go():
            worker.pause(START)
            worker.run(list(enumerate(worker.item.instructions)))

        return go

    names = [it.item_id for it in items]
    threads, errors = _launch(
        [body(w) for w in workers],
        names,
        lambda name, exc: store.leave(name, failed=exc is not None and not isinstance(exc, DeadlockDetected)),
    )
    for t in threads:
        t.join()
    _raise_first(names, errors)
    return RunResult(_outputs(items, workers), log.trace())


@dataclass(frozen=True)
class BarrierPlan:
    coordinator: ItemProgram
    workers: tuple[ItemProgram, ...]
    head: tuple[tuple[int, Instruction], ...]
    tail: tuple[tuple[int, Instruction], ...]

    @property
    def rendezvous_names(self) -> tuple[str, ...]:
        if not self.workers:
            return ()
        return ("barrier1", *(f"barrier{k + 2}" for k in range(len(self.workers))), "join")


def plan_barriers(items: Sequence[ItemProgram]) -> BarrierPlan:
    """Recognise one coordinator with a head and a tail around worker branches.

    The coordinator publishes everything before its first get_var; each
    worker reads only from the coordinator before computing and sends only
    back to it.
    """
    items = list(items)
    outputs = set().union(*(set(it.graph_outputs) for it in items)) if items else set()
    owners = [it for it in items if any(i.result in outputs for i in it.computations())]
    if len(owners) != 1:
        raise ShapeUnsupported("barrier mode needs exactly one item producing the graph outputs")
    coord = owners[0]
    workers = tuple(it for it in items if it is not coord)
    ids = {w.item_id for w in workers}
    indexed = list(enumerate(coord.instructions))
    sends = [k for k, i in indexed if i.op == "send_var"]
    gets = [k for k, i in indexed if i.op == "get_var"]
    if sends and gets and max(sends) > min(gets):
        raise ShapeUnsupported(f"{coord.item_id} sends after its first get_var")
    for k, inst in indexed:
        if inst.op == "get_var" and inst.arg("source").name not in ids:
            raise ShapeUnsupported(f"{coord.item_id} reads from unknown worker {inst.arg('source').name}")
    cut = min(gets) if gets else (max(sends) + 1 if sends else len(indexed))
    for w in workers:
        seen_work = False
        for inst in w.instructions:
            if inst.op == "get_var":
                if seen_work or inst.arg("source").name != coord.item_id:
                    raise ShapeUnsupported(f"{w.item_id} must read only from {coord.item_id}, before computing")
            elif inst.op == "send_var":
                seen_work = True
                if any(d.name != coord.item_id for d in inst.arg("dest")):
                    raise ShapeUnsupported(f"{w.item_id} sends to an item other than {coord.item_id}")
            elif inst.is_compute:
                seen_work = True
    if workers and not sends:
        raise ShapeUnsupported(f"{coord.item_id} has workers but publishes nothing")
    return BarrierPlan(coord, workers, tuple(indexed[:cut]), tuple(indexed[cut:]))


def run_barrier_schedule(
    items: Sequence[ItemProgram],
    inputs: Mapping[str, np.ndarray],
    weights: Mapping[str, np.ndarray],
    noise: Mapping[str, NoisePoint] | None = None,
) -> RunResult:
    """Stricter discipline: all items meet at ``barrier1`` once the head is
    published, each worker then meets the coordinator at its own barrier
    after sending its branch result, and the coordinator finally joins the
    worker threads.
    """
    items = list(items)
    plan = plan_barriers(items)
    noise = noise or {}
    _check_inputs(items, inputs)
    store = _make_store(items)
    log = _Collector()
    order = [plan.coordinator, *plan.workers]
    workers = {it.item_id: _Worker(it, store, log, inputs, weights, noise.get(it.item_id)) for it in order}
    first = threading.Barrier(len(order), timeout=BARRIER_TIMEOUT_S)
    pairs = [threading.Barrier(2, timeout=BARRIER_TIMEOUT_S) for _ in plan.workers]

    def meet(barrier: threading.Barrier, name: str, worker: _Worker, record: bool) -> None:
        try:
            barrier.wait()
        except threading.BrokenBarrierError:
            raise DeadlockDetected(f"{worker.item.item_id}: {name} broken") from None
        if record:
            log.meet(name)
        worker.pause(name)

    def branch(k: int, worker: _Worker):
        def go():
            worker.pause(START)
            meet(first, "barrier1", worker, False)
            worker.run(list(enumerate(worker.item.instructions)))
            meet(pairs[k], f"barrier{k + 2}", worker, False)

        return go

    def abort_all(name: str, exc: BaseException | None) -> None:
        if exc is not None:
            first.abort()
            for b in pairs:
                b.abort()

    names = [w.item_id for w in plan.workers]
    threads, errors = _launch(
        [branch(k, workers[w.item_id]) for k, w in enumerate(plan.workers)], names, abort_all
    )
    chief = workers[plan.coordinator.item_id]
    try:
        chief.pause(START)
        chief.run(plan.head)
        if plan.workers:
            meet(first, "barrier1", chief, True)
            for k, b in enumerate(pairs):
                meet(b, f"barrier{k + 2}", chief, True)
        chief.run(plan.tail)
    except BaseException as exc:
        abort_all(chief.item.item_id, exc)
        for t in threads:
            t.join()
        errors = {plan.coordinator.item_id: exc, **errors}
        _raise_first([plan.coordinator.item_id, *names], errors)
        raise
    for t in threads:
        t.join()
    if plan.workers:
        log.meet("join")
    _raise_first(names, errors)
    return RunResult(_outputs(order, list(workers.values())), log.trace())
