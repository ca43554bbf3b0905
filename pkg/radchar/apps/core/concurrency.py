"""
Bounded hand-off between a producer thread and the training loop.

Batches are assembled on a background thread while the caller computes on
the previous one. Order is preserved, so a seeded producer yields the same
sequence it would yield when consumed inline.
"""

import logging
import queue
import threading
from typing import Iterable, Iterator, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")

_DONE = object()


class _ProducerFailure:
    def __init__(self, exc: BaseException):
        self.exc = exc


def prefetch(items: Iterable[T], depth: int = 2) -> Iterator[T]:
    """
    Iterate ``items`` while a worker thread keeps up to ``depth`` items ready.

    Exceptions raised by the producer are re-raised in the consumer at the
    point where the failing item would have been delivered.

    Args:
        items: Any iterable; it is consumed on the worker thread.
        depth: Maximum number of items buffered ahead of the consumer.

    Yields:
        The items of ``items`` in their original order.
    """
    if depth < 1:
        raise ValueError("prefetch depth must be at least 1")

    buffer: "queue.Queue" = queue.Queue(maxsize=depth)
    stop = threading.Event()

    def produce():
        try:
            for item in items:
                while not stop.is_set():
                    try:
                        buffer.put(item, timeout=0.1)
                        break
                    except queue.Full:
                        continue
                if stop.is_set():
                    return
            sentinel = _DONE
        except BaseException as exc:  # re-raised on the consumer side
            sentinel = _ProducerFailure(exc)
        while not stop.is_set():
            try:
                buffer.put(sentinel, timeout=0.1)
                return
            except queue.Full:
                continue

    worker = threading.Thread(target=produce, name="radchar-prefetch", daemon=True)
    worker.start()

    try:
        while True:
            item = buffer.get()
            if item is _DONE:
                return
            if isinstance(item, _ProducerFailure):
                raise item.exc
            yield item
    finally:
        stop.set()
        worker.join(timeout=5.0)
        if worker.is_alive():
            logger.warning("Prefetch worker did not stop within 5 s")
