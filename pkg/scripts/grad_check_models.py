"""
Script that compares tape gradients of every model with central differences
"""
import sys
import os
import time
import argparse
sys.path.append(os.path.abspath(os.path.pardir))
from core.fusion.gradient_check import CHECK_CASES, check_model_gradients


TOLERANCE = 1e-4


def main():
    """
    Main function: check all models, exit with 1 if any error is too large
    """
    parser = argparse.ArgumentParser(description='Gradient check of all fusion models')
    parser.add_argument('--seed', type=int, default=1, help='Seed of inputs and parameters')
    parser.add_argument('--eps', type=float, default=1e-5, help='Finite difference step')
    args = parser.parse_args()
    failed = 0
    start = time.time()
    for kind, overrides in CHECK_CASES:
        error = check_model_gradients(kind, overrides, seed=args.seed, eps=args.eps)
        status = 'ok' if error < TOLERANCE else 'FAILED'
        if error >= TOLERANCE:
            failed += 1

        options = ', '.join(f'{key}={value}' for key, value in overrides.items())
        print('%-14s %-20s max relative error %.3e %s' % (kind, options, error, status))

    print('Checked %s models in %.1fs, %s failed' % (len(CHECK_CASES), time.time() - start, failed))
    return 1 if failed else 0


if __name__ == '__main__':
    sys.exit(main())
