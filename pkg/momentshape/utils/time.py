import logging
from types import TracebackType
from typing import Optional, Type

from mpi4py import MPI

logger = logging.getLogger(__name__)


class RunTimer:
    """
    A context manager measuring the wall time of a command run with
    MPI.Wtime. With synchronization, all ranks meet at a barrier before and
    after the block, so the time covers the slowest rank.
    """

    def __init__(self, name: str, synchronize: bool = False):
        """
        :param name: the name to log the wall time under
        :param synchronize: whether to time the block across all MPI ranks
        """
        self._name = name
        self._synchronize = synchronize
        self._start_time: Optional[float] = None
        self._wall_time: Optional[float] = None

    @property
    def name(self) -> str:
        """
        The name the wall time is logged under.
        """
        return self._name

    @property
    def wall_time(self) -> Optional[float]:
        """
        The wall time of the block in seconds, or None before it exits.
        """
        return self._wall_time

    def __enter__(self) -> "RunTimer":
        if self._synchronize:
            MPI.COMM_WORLD.barrier()
        self._start_time = MPI.Wtime()
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc_value: Optional[BaseException],
        traceback: Optional[TracebackType],
    ):
        comm = MPI.COMM_WORLD
        if self._synchronize and exc_type is None:
            comm.barrier()
        self._wall_time = MPI.Wtime() - self._start_time

        if exc_type is not None:
            logger.info("%s failed after %.6fs", self._name, self._wall_time)
        elif comm.rank == 0:
            logger.info(
                "%s completed in %.6fs on %d ranks",
                self._name,
                self._wall_time,
                comm.size if self._synchronize else 1,
            )
