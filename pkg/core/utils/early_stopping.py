"""
Module that contains EarlyStopping class
"""
import logging


class EarlyStopping():
    """
    Stop training when dev loss has not improved for `patience` epochs
    A loss counts as an improvement only if it is lower than the best loss by
    more than min_delta
    """

    def __init__(self, patience=5, min_delta=0.0):
        self.logger = logging.getLogger()
        self.patience = patience
        self.min_delta = min_delta
        self.counter = 0
        self.best_loss = None
        self.best_epoch = None
        self.early_stop = False

    def __call__(self, epoch, dev_loss):
        """
        Register dev loss of an epoch, return True if this epoch is the new best
        """
        if self.best_loss is None or self.best_loss - dev_loss > self.min_delta:
            self.best_loss = dev_loss
            self.best_epoch = epoch
            self.counter = 0
            return True

        self.counter += 1
        self.logger.debug('Early stopping counter %s of %s', self.counter, self.patience)
        if self.counter >= self.patience:
            self.early_stop = True

        return False
