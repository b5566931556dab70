"""
Module that contains APIBase class
"""
import json
import logging
import traceback
from functools import wraps
import flask
from flask_restful import Resource
from core.utils.errors import MMFuseError


class APIBase(Resource):
    """
    Base class for all API endpoints
    """

    def __init__(self):
        Resource.__init__(self)
        self.logger = logging.getLogger()

    @staticmethod
    def output_text(data, code=200, headers=None):
        """
        Makes a Flask response with a JSON encoded body
        """
        response = flask.make_response(json.dumps(data, indent=1, sort_keys=True))
        response.headers['Content-Type'] = 'application/json'
        response.headers.extend(headers or {})
        response.status_code = code
        return response

    @staticmethod
    def ensure_request_data(func):
        """
        Ensure that request has a JSON body
        """
        @wraps(func)
        def ensure_request_data_wrapper(*args, **kwargs):
            data = flask.request.data
            if not data:
                return APIBase.output_text({'response': None,
                                            'success': False,
                                            'message': 'No data was found in request'},
                                           code=400)

            try:
                json.loads(data.decode('utf-8'))
            except (UnicodeDecodeError, json.JSONDecodeError) as ex:
                return APIBase.output_text({'response': None,
                                            'success': False,
                                            'message': f'Request body is not JSON: {ex}'},
                                           code=400)

            return func(*args, **kwargs)

        return ensure_request_data_wrapper

    @staticmethod
    def exceptions_to_errors(func):
        """
        Catch errors and return them as JSON with "<error_class>: <message>"
        """
        @wraps(func)
        def exceptions_to_errors_wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except MMFuseError as ex:
                logging.getLogger().warning(ex.one_line())
                return APIBase.output_text({'response': None,
                                            'success': False,
                                            'message': ex.one_line()},
                                           code=400)
            except Exception as ex:
                logging.getLogger().error(traceback.format_exc())
                return APIBase.output_text({'response': None,
                                            'success': False,
                                            'message': f'{ex.__class__.__name__}: {ex}'},
                                           code=500)

        return exceptions_to_errors_wrapper
