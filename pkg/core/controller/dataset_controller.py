"""
Module that contains DatasetController class
"""
import json
import numpy as np
from core.kernel.matrix import Matrix, Precision
from core.controller.controller_base import ControllerBase
from core.model.dataset import Dataset, DatasetHeader, SPLITS
from core.model.feature_record import FeatureRecord
from core.model.synth_config import SynthConfig
from core.model.train_config import IMPUTATIONS
from core.utils.feature_store import read_dataset, write_dataset
from core.utils.random_streams import make_stream, SYNTH_STREAM
from core.utils.errors import (ConfigError,
                               EmptySplitError,
                               FormatError,
                               ShapeMismatchError)


REGIME_SPLITS = {'all': (),
                 'paired-all': SPLITS,
                 'paired-train': ('train',)}


def unit_rows(array):
    """
    Rows scaled to unit length, zero rows stay zero
    """
    array = np.asarray(array, dtype=np.float64)
    norms = np.linalg.norm(array, axis=1, keepdims=True)
    return np.divide(array, norms, out=np.zeros_like(array), where=norms > 0)


class DatasetController(ControllerBase):
    """
    Controller that has all actions related to datasets
    """

    def load(self, path):
        """
        Load a MMFV1 dataset directory
        """
        return read_dataset(path)

    def write(self, dataset, path, force=False):
        """
        Write a dataset as MMFV1 directory
        """
        write_dataset(dataset, path, force)

    def validate(self, path):
        """
        Load a dataset and return a validation report
        Loading already checks magic, offsets, widths, labels and finiteness
        """
        dataset = self.load(path)
        header = dataset.header
        summary = dataset.summary()
        report = {'dataset': path,
                  'valid': True,
                  'format': header.get('format'),
                  'd_t': header.get('d_t'),
                  'd_v': header.get('d_v'),
                  'granularity': header.get('granularity'),
                  'classes': header.get('classes'),
                  'records': len(dataset),
                  'splits': summary,
                  'warnings': []}
        for split in SPLITS:
            if not summary[split]['records']:
                report['warnings'].append(f'Split {split} is empty')

        missing = [header.get('classes')[index]
                   for index, count in enumerate(summary['train']['labels']) if count == 0]
        if missing:
            report['warnings'].append(f'Classes without train records: {", ".join(missing)}')

        for warning in report['warnings']:
            self.logger.warning(warning)

        return report

    def average_image(self, records):
        """
        Elementwise mean of image features of all given records that have an image
        Callers pass train records only
        """
        images = [r.get('image_feats') for r in records if r.get('has_image')]
        images = [image for image in images if image is not None]
        if not images:
            raise EmptySplitError('Cannot compute average image: no train record has an image')

        shapes = sorted({image.shape for image in images})
        if len(shapes) > 1:
            raise ShapeMismatchError(f'Cannot average images of different shapes: {shapes}')

        stacked = np.stack([image.data for image in images]).astype(np.float64)
        precision = images[0].precision
        average = Matrix(stacked.mean(axis=0), precision, name='average image')
        self.logger.info('Average image computed from %s train images', len(images))
        return average

    def impute_missing(self, dataset, average_image):
        """
        Give every record without an image the average image, has_image is kept
        """
        d_v = dataset.header.get('d_v')
        if average_image.cols != d_v:
            raise ShapeMismatchError(f'Average image is '
                                     f'{average_image.rows}x{average_image.cols}, '
                                     f'dataset image width is {d_v}')

        records = []
        imputed = 0
        for record in dataset.records():
            if not record.get('has_image'):
                record = record.with_image(average_image)
                imputed += 1

            records.append(record)

        self.logger.debug('Imputed %s missing images', imputed)
        return dataset.replace(records, average_image)

    def impute_nearest(self, dataset, donors, average_image):
        """
        Give every record without an image the image of the donor whose row-mean
        text features have the highest cosine similarity, ties go to the first donor
        The average image is kept on the dataset for inference on single posts
        """
        donors = [r for r in donors if r.get('has_image') and r.get('image_feats') is not None]
        if not donors:
            raise EmptySplitError('Nearest image imputation needs train records with images')

        donor_text = unit_rows(np.concatenate([r.get('text_feats').row_mean().data
                                               for r in donors]))
        records = []
        imputed = 0
        for record in dataset.records():
            if not record.get('has_image'):
                query = unit_rows(record.get('text_feats').row_mean().data)
                nearest = int(np.argmax(donor_text @ query[0]))
                record = record.with_image(donors[nearest].get('image_feats'))
                imputed += 1

            records.append(record)

        self.logger.debug('Imputed %s missing images from %s donors', imputed, len(donors))
        return dataset.replace(records, average_image)

    def filter_paired(self, dataset, splits=SPLITS):
        """
        Keep only records that originally have an image in the given splits
        """
        records = [r for r in dataset.records()
                   if r.get('split') not in splits or r.get('has_image')]
        self.logger.info('Paired filter on %s: %s of %s records kept',
                         ', '.join(splits) or 'no splits',
                         len(records),
                         len(dataset))
        return dataset.replace(records, dataset.average_image)

    def apply_regime(self, dataset, regime):
        """
        all: everything, paired-all: paired records in every split,
        paired-train: paired train records, all dev and test records
        """
        if regime not in REGIME_SPLITS:
            raise ConfigError(f'Unknown regime "{regime}", '
                              f'expected one of {", ".join(REGIME_SPLITS)}')

        if regime == 'all':
            return dataset

        return self.filter_paired(dataset, REGIME_SPLITS[regime])

    def prepare(self, dataset, regime, needs_image=True, imputation='average'):
        """
        Filter by regime, compute average image from the active train split and impute
        with it or with the image of the nearest train post
        Return prepared dataset
        """
        if imputation not in IMPUTATIONS:
            raise ConfigError(f'Unknown imputation "{imputation}", '
                              f'expected one of {", ".join(IMPUTATIONS)}')

        dataset = self.apply_regime(dataset, regime)
        train = dataset.split('train')
        if not train:
            raise EmptySplitError(f'Train split is empty in regime {regime}')

        if not needs_image:
            return dataset

        if not any(r.get('has_image') for r in train):
            raise EmptySplitError(f'No train record has an image in regime {regime}')

        average_image = self.average_image(train)
        self.logger.info('Average image recomputed from the %s train split of regime %s',
                         len(train),
                         regime)
        if imputation == 'nearest':
            return self.impute_nearest(dataset, train, average_image)

        return self.impute_missing(dataset, average_image)

    def class_weights(self, counts, weighting='balanced'):
        """
        Balanced weights w_c = N / (M * N_c), or all ones
        """
        counts = np.asarray(counts, dtype=np.int64)
        if weighting == 'none':
            return np.ones(counts.shape[0], dtype=np.float64)

        if weighting != 'balanced':
            raise ConfigError(f'Unknown class weighting "{weighting}"')

        empty = [str(index) for index, count in enumerate(counts) if count < 1]
        if empty:
            raise ConfigError(f'Balanced class weights are undefined, classes {", ".join(empty)} '
                              f'have no train records')

        total = float(counts.sum())
        return total / (counts.shape[0] * counts.astype(np.float64))

    def majority_class(self, counts):
        """
        Most frequent class of train label counts, ties go to the lowest index
        """
        counts = np.asarray(counts, dtype=np.int64)
        if counts.sum() < 1:
            raise EmptySplitError('Majority baseline needs a non-empty train split')

        return int(np.argmax(counts))

    def majority_baseline(self, train_counts, test_size):
        """
        Constant predictions of the majority class for every test record
        """
        return np.full(test_size, self.majority_class(train_counts), dtype=np.int64)

    def load_poi_counts(self, path):
        """
        Read per-class per-split tweet and image counts
        """
        with open(path) as counts_file:
            try:
                counts = json.load(counts_file)
            except json.JSONDecodeError as ex:
                raise FormatError(f'{path} is not valid JSON') from ex

        classes = counts.get('classes', [])
        for kind in ('tweets', 'images'):
            for split in SPLITS:
                values = counts.get(kind, {}).get(split)
                if not isinstance(values, list) or len(values) != len(classes):
                    raise FormatError(f'{path} needs {len(classes)} {kind} counts for {split}')

        return counts

    def class_patterns(self, generator, classes, width):
        """
        Distinct +1/-1 rows, one per class
        """
        if width < 63 and 2 ** width < classes:
            raise ConfigError(f'Width {width} cannot hold {classes} distinct sign patterns')

        while True:
            patterns = np.where(generator.random((classes, width)) < 0.5, -1.0, 1.0)
            if len({row.tobytes() for row in patterns}) == classes:
                return patterns

    def synth_generate(self, config):
        """
        Synthetic dataset where, per record, one modality carries a class pattern
        and the other one is noise
        The informative modality is text with probability rho, records
        without an image always carry the signal in text
        """
        if not isinstance(config, SynthConfig):
            config = SynthConfig(config)

        classes = config.get('classes')
        d_t = config.get('d_t')
        d_v = config.get('d_v')
        text_rows, image_rows = config.get_rows()
        mu = config.get('mu')
        sigma_s = config.get('sigma_s')
        sigma_n = config.get('sigma_n')
        rho = config.get('rho')
        image_fraction = config.get('image_fraction')
        generator = make_stream(config.get('seed'), SYNTH_STREAM)
        text_patterns = self.class_patterns(generator, classes, d_t)
        image_patterns = self.class_patterns(generator, classes, d_v)

        def draw(pattern, rows, informative):
            noise = generator.standard_normal((rows, pattern.shape[0]))
            if informative:
                values = mu * pattern + sigma_s * noise
            else:
                values = sigma_n * noise

            return Matrix(values.astype(np.float32), Precision.SINGLE)

        records = []
        for split in SPLITS:
            for index in range(config.get(f'{split}_size')):
                label = int(generator.integers(classes))
                has_image = bool(generator.random() < image_fraction)
                text_informative = bool(generator.random() < rho) or not has_image
                text_feats = draw(text_patterns[label], text_rows, text_informative)
                image_feats = None
                if has_image:
                    image_feats = draw(image_patterns[label], image_rows, not text_informative)

                informative = 'text' if text_informative else 'image'
                records.append(FeatureRecord({'id': f'{split}-{index:06d}',
                                              'label': label,
                                              'split': split,
                                              'has_image': has_image,
                                              'text_feats': text_feats,
                                              'image_feats': image_feats,
                                              'extras': {'informative': informative}}))

        header = DatasetHeader({'d_t': d_t,
                                'd_v': d_v,
                                'granularity': config.get('granularity'),
                                'classes': [f'class-{c}' for c in range(classes)]})
        dataset = Dataset(header, records)
        self.logger.info('Generated %s synthetic records, %s with image',
                         len(dataset),
                         dataset.paired_count())
        return dataset
