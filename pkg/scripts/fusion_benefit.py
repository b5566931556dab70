"""
Script that trains every model on synthetic data where each modality is
informative for a share of the records and prints mean macro scores
"""
import sys
import os
import argparse
sys.path.append(os.path.abspath(os.path.pardir))
from core.controller.analysis_controller import AnalysisController, GATE_KINDS
from core.controller.dataset_controller import DatasetController
from core.controller.train_controller import TrainController
from core.fusion.classifiers import CLASSIFIERS
from core.model.model_config import ModelConfig


def parse_list(value, cast=str):
    """
    "a,b" to ["a", "b"]
    """
    return [cast(item) for item in value.split(',') if item.strip()]


def main():
    """
    Main function: generate data, train and evaluate every model over seeds
    """
    parser = argparse.ArgumentParser(description='Fusion benefit on synthetic data')
    parser.add_argument('--models', default=','.join(CLASSIFIERS), help='Comma separated models')
    parser.add_argument('--seeds', default='1,2,3', help='Comma separated seeds')
    parser.add_argument('--rho', type=float, default=0.5, help='Share of text-informative records')
    parser.add_argument('--regime', default='all', choices=['all', 'paired-all', 'paired-train'])
    parser.add_argument('--image-fraction', dest='image_fraction', type=float, default=1.0)
    parser.add_argument('--width', type=int, default=16, help='Hidden and attention width')
    parser.add_argument('--epochs', type=int, default=30, help='Maximum number of epochs')
    args = parser.parse_args()

    dataset_controller = DatasetController()
    dataset = dataset_controller.synth_generate({'classes': 2,
                                                 'train_size': 2000,
                                                 'dev_size': 500,
                                                 'test_size': 500,
                                                 'd_t': 8,
                                                 'd_v': 8,
                                                 'rho': args.rho,
                                                 'mu': 1.0,
                                                 'sigma_s': 0.5,
                                                 'sigma_n': 1.0,
                                                 'image_fraction': args.image_fraction})
    prepared = dataset_controller.prepare(dataset, args.regime)
    header = prepared.header
    model_config = ModelConfig({'d_t': header.get('d_t'),
                                'd_v': header.get('d_v'),
                                'd': args.width,
                                'd_proj': args.width,
                                'classes': header.class_count(),
                                'granularity': header.get('granularity')})
    train_config = {'learning_rate': 0.01,
                    'batch_size': 32,
                    'max_epochs': args.epochs,
                    'patience': 4,
                    'precision': 'double'}
    seeds = parse_list(args.seeds, int)
    train_controller = TrainController()
    analysis_controller = AnalysisController()
    print('%-14s %14s %14s %14s %10s' % ('model', 'F1', 'P', 'R', 'text %'))
    for kind in parse_list(args.models):
        runs = train_controller.run_seeds(kind,
                                          prepared,
                                          train_config,
                                          model_config,
                                          seeds,
                                          args.regime)
        summary = runs.summary()
        scores = ['%6.2f (%5.2f)' % (summary[key]['mean_percent'], summary[key]['std_percent'])
                  for key in ('f1', 'precision', 'recall')]
        text_share = ''
        if kind in GATE_KINDS:
            shares = [analysis_controller.gate_contribution(run.checkpoint,
                                                            prepared,
                                                            'test').overall_text_share
                      for run in runs.runs]
            text_share = '%.2f' % (100 * sum(shares) / len(shares))

        print('%-14s %s %s %s %10s' % (kind, *scores, text_share))


if __name__ == '__main__':
    main()
