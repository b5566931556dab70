"""
Main module: command line interface of mmfuse and the read-only JSON API
"""
import os
import os.path
import sys
import json
import logging
import logging.handlers
import argparse
import traceback
from flask_restful import Api
from flask_cors import CORS
from flask import Flask, jsonify
from core.controller.run_controller import RunController
from core.model.run_config import RunConfig, SCHEMA_VERSION
from core.utils.checkpoint_store import read_checkpoint
from core.utils.errors import MMFuseError, ConfigError
from core.utils.global_config import Config
from core.utils.run_filter import RunFilter
from api.checkpoint_api import CheckpointInfoAPI, PredictAPI, ServedCheckpoint
from api.system_api import BuildInfoAPI, UptimeInfoAPI


BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DEFAULT_ENV_CONFIG = os.path.join(BASE_DIR, 'config.cfg')
DEFAULT_FIXTURE = os.path.join(BASE_DIR, 'fixtures', 'poi_counts.json')
LOG_FORMAT = '[%(asctime)s][%(run)s][%(levelname)s] %(message)s'


def create_app():
    """
    Flask application with checkpoint and system endpoints
    """
    app = Flask(__name__)
    app.url_map.strict_slashes = False
    api = Api(app)
    CORS(app, allow_headers=['Content-Type'])

    @app.route('/api', defaults={'_path': ''})
    @app.route('/api/<path:_path>')
    def api_documentation(_path):
        """
        Endpoint for API documentation as JSON
        """
        docs = {}
        for endpoint, view in app.view_functions.items():
            view_class = dict(view.__dict__).get('view_class')
            if view_class is None:
                continue

            #pylint: disable=protected-access
            urls = sorted([r.rule for r in app.url_map._rules_by_endpoint[endpoint]])
            #pylint: enable=protected-access
            if _path:
                urls = [u for u in urls if u.startswith(f'/api/{_path}')]
                if not urls:
                    continue

            category = [x for x in urls[0].split('/') if x][1]
            methods = {}
            for method_name in sorted(view_class.methods):
                method = view_class.__dict__.get(method_name.lower())
                methods[method_name] = {'doc': (method.__doc__ or '').strip()}

            docs.setdefault(category, {})[view_class.__name__] = {
                'doc': (view_class.__doc__ or '').strip(),
                'urls': urls,
                'methods': methods}

        return jsonify(docs)

    api.add_resource(CheckpointInfoAPI, '/api/checkpoint/info')
    api.add_resource(PredictAPI, '/api/predict')
    api.add_resource(BuildInfoAPI, '/api/system/build_info')
    api.add_resource(UptimeInfoAPI, '/api/system/uptime')
    return app


def setup_logging(debug):
    """
    Setup logging format and place - stderr for debug mode and rotating files otherwise
    MMFUSE_LOG environment variable overrides the level
    """
    logger = logging.getLogger()
    logger.propagate = False
    if debug:
        handler = logging.StreamHandler(sys.stderr)
        level = logging.DEBUG
    else:
        log_dir = Config.get('log_dir', 'logs')
        if not os.path.isdir(log_dir):
            os.makedirs(log_dir)

        log_file = os.path.join(log_dir, Config.get('log_file', 'mmfuse.log'))
        handler = logging.handlers.RotatingFileHandler(log_file, 'a', 8*1024*1024, 50)
        level = logging.INFO

    env_level = os.environ.get('MMFUSE_LOG')
    if env_level:
        level = logging.getLevelName(env_level.upper())
        if not isinstance(level, int):
            raise ConfigError(f'MMFUSE_LOG={env_level} is not a logging level')

    formatter = logging.Formatter(fmt=LOG_FORMAT)
    handler.setFormatter(formatter)
    handler.setLevel(level)
    handler.addFilter(RunFilter())
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.setLevel(level)
    # Set flask logging to warning
    logging.getLogger('werkzeug').setLevel(logging.WARNING)
    return logger


def parse_seeds(value):
    """
    "1,2,3" to [1, 2, 3]
    """
    try:
        seeds = [int(seed) for seed in value.split(',') if seed.strip()]
    except ValueError as ex:
        raise argparse.ArgumentTypeError(f'Invalid seed list "{value}"') from ex

    if not seeds:
        raise argparse.ArgumentTypeError('Seed list is empty')

    return seeds


def make_parser():
    """
    Argument parser with one subcommand per operation
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON run config or run manifest to reproduce')
    common.add_argument('--mode',
                        help='Use production (prod) or development (dev) section of env config',
                        choices=['prod', 'dev'],
                        default='dev')
    common.add_argument('--env-config',
                        dest='env_config',
                        help='Specify non standard env config file name')
    common.add_argument('--debug', help='Log to console at debug level', action='store_true')
    common.add_argument('--out', help='Output directory')
    common.add_argument('--force', help='Allow non-empty output directory', action='store_true')

    parser = argparse.ArgumentParser(description='mmfuse - multimodal fusion for POI type '
                                                 'prediction')
    commands = parser.add_subparsers(dest='command', required=True)
    synth = commands.add_parser('synth', parents=[common], help='Generate synthetic dataset')
    synth.add_argument('--seed', type=int, help='Generator seed')

    validate = commands.add_parser('ingest-validate',
                                   parents=[common],
                                   help='Validate a dataset directory')
    validate.add_argument('--dataset', help='MMFV1 dataset directory')

    train = commands.add_parser('train', parents=[common], help='Train a model over seeds')
    train.add_argument('--dataset', help='MMFV1 dataset directory')
    train.add_argument('--model', help='Model kind')
    train.add_argument('--regime', choices=['all', 'paired-all', 'paired-train'])
    train.add_argument('--seed', type=int, help='Train a single seed')
    train.add_argument('--seeds', type=parse_seeds, help='Comma separated seeds')
    train.add_argument('--precision', choices=['single', 'double'])

    for name, help_text in (('evaluate', 'Evaluate a checkpoint'),
                            ('analyze-gate', 'Gate contribution per category'),
                            ('dump-attention', 'Export cross-attention weights'),
                            ('errors', 'Misclassification report')):
        command = commands.add_parser(name, parents=[common], help=help_text)
        command.add_argument('--checkpoint', help='Checkpoint file')
        command.add_argument('--dataset', help='MMFV1 dataset directory')
        command.add_argument('--regime', choices=['all', 'paired-all', 'paired-train'])
        command.add_argument('--split', choices=['train', 'dev', 'test'])
        if name == 'analyze-gate':
            command.add_argument('--group-by', dest='group_by', choices=['predicted', 'gold'])

        if name == 'dump-attention':
            command.add_argument('--compare-checkpoint',
                                 dest='compare_checkpoint',
                                 help='Keep posts this model gets wrong and the dumped one right')
            command.add_argument('--min-image-share',
                                 dest='min_image_share',
                                 type=float,
                                 default=0.0,
                                 help='Minimum image share in percent of kept posts')

        if name == 'errors':
            command.add_argument('--predictions', help='predictions.jsonl of an earlier run')

    baseline = commands.add_parser('baseline',
                                   parents=[common],
                                   help='Majority baseline on per-class counts')
    baseline.add_argument('--fixture', default=DEFAULT_FIXTURE, help='Counts fixture')

    serve = commands.add_parser('serve', parents=[common], help='Serve a checkpoint as JSON API')
    serve.add_argument('--checkpoint', help='Checkpoint file')
    return parser


def build_run_config(args):
    """
    Run config from --config with command line overrides
    """
    if args.get('config'):
        json_input = RunConfig.from_file(args['config']).get_json()
    else:
        json_input = {'schema_version': SCHEMA_VERSION}

    for key in ('model', 'dataset', 'regime', 'out', 'split', 'group_by'):
        if args.get(key):
            json_input[key] = args[key]

    train = dict(json_input.get('train', {}))
    synth = dict(json_input.get('synth', {}))
    if args.get('seed') is not None:
        train['seed'] = args['seed']
        train['seeds'] = [args['seed']]
        synth['seed'] = args['seed']

    if args.get('seeds'):
        train['seeds'] = args['seeds']

    if args.get('precision'):
        train['precision'] = args['precision']

    json_input['train'] = train
    json_input['synth'] = synth
    return RunConfig(json_input)


def summary_line(metrics):
    """
    One line with macro scores in percent
    """
    scores = metrics['summary'] if 'summary' in metrics else None
    if scores:
        return ' '.join(f'{key.upper()} {value["mean_percent"]:.2f} ({value["std_percent"]:.2f})'
                        for key, value in scores.items())

    return ' '.join(f'{key.upper()} {value:.2f}'
                    for key, value in metrics['metrics']['macro_percent'].items())


def run_command(args):
    """
    Run one command, return text that is printed on success
    """
    command = args['command']
    controller = RunController()
    run_config = build_run_config(args)
    out = run_config.get('out')
    force = args.get('force', False)
    if command == 'synth':
        if not out:
            raise ConfigError('Output directory is not set, use --out')

        result = controller.cmd_synth(run_config, out, force)
        return f'Wrote {result["records"]} records to {out}'

    if command == 'ingest-validate':
        report = controller.cmd_ingest_validate(run_config.get('dataset'), out, force)
        return json.dumps({'valid': report['valid'],
                           'records': report['records'],
                           'warnings': report['warnings']})

    if command == 'train':
        return summary_line(controller.cmd_train(run_config, force))

    if command == 'baseline':
        return summary_line(controller.cmd_baseline(args['fixture'], out, force))

    if command == 'serve':
        serve(args.get('checkpoint'), args.get('debug', False))
        return ''

    if not out:
        raise ConfigError('Output directory is not set, use --out')

    checkpoint = args.get('checkpoint')
    dataset = run_config.get('dataset')
    regime = args.get('regime')
    split = run_config.get('split')
    if command == 'evaluate':
        metrics = controller.cmd_evaluate(checkpoint, dataset, out, regime, split, force)
        return summary_line(metrics)

    which = {'analyze-gate': 'gate', 'dump-attention': 'attention', 'errors': 'errors'}[command]
    controller.cmd_analyze(which,
                           checkpoint,
                           dataset,
                           out,
                           regime,
                           split,
                           run_config.get('group_by'),
                           args.get('predictions'),
                           force,
                           args.get('compare_checkpoint'),
                           args.get('min_image_share') or 0.0)
    return f'Wrote {which} report to {out}'


def serve(checkpoint_path, debug):
    """
    Start Flask web server for a checkpoint
    """
    if not checkpoint_path or not os.path.isfile(checkpoint_path):
        raise ConfigError(f'Checkpoint {checkpoint_path} does not exist')

    ServedCheckpoint.set(read_checkpoint(checkpoint_path), checkpoint_path)
    port = int(Config.get('port', 8002))
    host = Config.get('host', '127.0.0.1')
    logging.getLogger().info('Starting... Debug: %s, Host: %s, Port: %s', debug, host, port)
    create_app().run(host=host, port=port, threaded=True, debug=debug)


def main(argv=None):
    """
    Main function: parse arguments, run a command, print one line on error
    """
    args = vars(make_parser().parse_args(argv))
    env_config = args.get('env_config')
    try:
        if env_config or os.path.isfile(DEFAULT_ENV_CONFIG):
            Config.load(env_config or DEFAULT_ENV_CONFIG, args.get('mode'))

        debug = args.get('debug') or bool(Config.get('development', False))
        logger = setup_logging(debug)
        RunFilter.set_run(args['command'])
        logger.info('Running %s', args['command'])
        output = run_command(args)
    except MMFuseError as ex:
        logging.getLogger().debug(traceback.format_exc())
        print(ex.one_line(), file=sys.stderr)
        return 1
    except Exception as ex:
        if logging.getLogger().handlers:
            logging.getLogger().error(traceback.format_exc())

        message = ' '.join(str(ex).split())
        print(f'{ex.__class__.__name__}: {message}', file=sys.stderr)
        return 1

    if output:
        print(output)

    return 0


if __name__ == '__main__':
    sys.exit(main())
