"""
Module that contains RunFilter class
"""
import logging


class RunFilter(logging.Filter):
    """
    Logging filter that adds the name of the current run to every record
    """

    __run = '-'

    @classmethod
    def set_run(cls, run):
        """
        Set the run name that is shown in log lines, e.g. "train/seed=2"
        """
        cls.__run = run or '-'

    @classmethod
    def get_run(cls):
        """
        Return current run name
        """
        return cls.__run

    def filter(self, record):
        record.run = RunFilter.__run
        return True
