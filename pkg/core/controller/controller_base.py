"""
Module that contains ControllerBase class
"""
import logging
from contextlib import contextmanager
from core.utils.run_filter import RunFilter


class ControllerBase():
    """
    Base class of all controllers
    """

    def __init__(self):
        self.logger = logging.getLogger()

    @contextmanager
    def run_context(self, run):
        """
        Show given run name in log lines inside the block
        """
        previous = RunFilter.get_run()
        RunFilter.set_run(run)
        try:
            yield
        finally:
            RunFilter.set_run(previous)
