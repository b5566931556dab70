"""
Module that contains DatasetHeader and Dataset classes
"""
import numpy as np
from core.model.model_base import ModelBase
from core.utils.errors import ConfigError


SPLITS = ('train', 'dev', 'test')

POI_CLASSES = ['Arts & Entertainment',
               'College & University',
               'Food',
               'Great Outdoors',
               'Nightlife Spot',
               'Professional & Other Places',
               'Shop & Service',
               'Travel & Transport']


class DatasetHeader(ModelBase):
    """
    Shared description of all records of a dataset
    """

    _ModelBase__schema = {
        # Format magic
        'format': 'MMFV1',
        # Text feature width
        'd_t': 1,
        # Image feature width
        'd_v': 1,
        # pooled (one row per modality) or sequence
        'granularity': 'pooled',
        # Ordered class catalog
        'classes': list(POI_CLASSES),
    }

    lambda_checks = {
        'd_t': ModelBase.lambda_check('dimension'),
        'd_v': ModelBase.lambda_check('dimension'),
        'granularity': ModelBase.lambda_check('granularity'),
        'classes': lambda classes: len(classes) >= 2 and len(set(classes)) == len(classes),
        '__classes': ModelBase.class_name_check,
    }

    def class_count(self):
        """
        Number of classes M
        """
        return len(self.get('classes'))

    def label_index(self, label):
        """
        Index of a class name, None if unknown
        """
        classes = self.get('classes')
        return classes.index(label) if label in classes else None


class Dataset():
    """
    Records grouped by split with a shared header
    Datasets are not modified, operations return new datasets
    """

    def __init__(self, header, records=None, average_image=None):
        self.header = header
        self.average_image = average_image
        self.__splits = {split: [] for split in SPLITS}
        seen = set()
        for record in records or []:
            record_id = record.get_id()
            if record_id in seen:
                raise ConfigError(f'Record id {record_id} appears more than once')

            seen.add(record_id)
            self.__splits[record.get('split')].append(record)

    def split(self, name):
        """
        Records of one split
        """
        return list(self.__splits[name])

    def records(self):
        """
        All records, train first, then dev, then test
        """
        return [record for split in SPLITS for record in self.__splits[split]]

    def __len__(self):
        return sum(len(records) for records in self.__splits.values())

    def class_count(self):
        """
        Number of classes M
        """
        return self.header.class_count()

    def label_counts(self, split):
        """
        Number of records of each class in a split
        """
        counts = np.zeros(self.class_count(), dtype=np.int64)
        for record in self.__splits[split]:
            counts[record.get('label')] += 1

        return counts

    def paired_count(self, split=None):
        """
        Number of records that originally have an image
        """
        splits = [split] if split else SPLITS
        return sum(1 for name in splits for r in self.__splits[name] if r.get('has_image'))

    def replace(self, records=None, average_image=None):
        """
        New dataset with the same header
        """
        if records is None:
            records = self.records()

        return Dataset(self.header, records, average_image)

    def summary(self):
        """
        Dictionary with counts per split, used in logs and validation reports
        """
        return {split: {'records': len(self.__splits[split]),
                        'paired': self.paired_count(split),
                        'labels': self.label_counts(split).tolist()}
                for split in SPLITS}
