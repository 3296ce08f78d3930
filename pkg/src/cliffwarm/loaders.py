"""Loaders read environments and problem instances from files.

Config files are an alternative to building an
:class:`~cliffwarm.env.Environment` in code.
"""

import json
import inspect
from os import path

import yaml

from .env import Environment, env_options
from .exceptions import ArgumentError, EnvironmentError, LoaderError
from .problems import Problem, problem_from_dict


__all__ = ('YAMLLoader', 'InstanceLoader', 'LoaderError')


class YAMLLoader(object):
    """Will load an environment from a YAML file. JSON is valid YAML, so
    JSON config files work as well.
    """

    def __init__(self, file_or_filename):
        self.file_or_filename = file_or_filename

    def _open(self):
        """Returns a (fileobj, filename) tuple.

        The filename can be False if it is unknown.
        """
        if isinstance(self.file_or_filename, str):
            try:
                return open(self.file_or_filename), self.file_or_filename
            except IOError as e:
                raise LoaderError('cannot open config file: %s' % e)

        file = self.file_or_filename
        return file, getattr(file, 'name', False)

    @classmethod
    def _get_import_resolver(cls):
        """Tests replace this to simulate a missing zope.dottedname."""
        from zope.dottedname.resolve import resolve as resolve_dotted
        return resolve_dotted

    def _register_problems(self, names):
        try:
            resolve_dotted = self._get_import_resolver()
        except ImportError:
            raise EnvironmentError(
                "In order to use custom problems in the YAMLLoader "
                "you must install the zope.dottedname package")
        for name in names:
            try:
                cls = resolve_dotted(name)
            except ImportError:
                raise LoaderError("Unable to resolve class %s" % name)
            if not inspect.isclass(cls) or not issubclass(cls, Problem):
                raise LoaderError("Custom problems must be Problem "
                                  "subclasses, got %s" % name)
            if not cls.id:
                raise LoaderError("Custom problem %s has no id" % name)
            # Defining the class registered it; make sure a class that was
            # replaced by a later definition with the same id wins again.
            Problem.REGISTRY[cls.id] = cls

    def load_environment(self):
        """Load an :class:`Environment` instance defined in the file.

        Expects the following format:

        .. code-block:: yaml

            preset: maxcut_8
            directory: runs
            seeds: [0, 1, 2]
            c_puct: 1.5
            problems:
                - my_package.problems.MyProblem

        All values are optional. ``preset`` is applied first, every other
        key overrides it. ``directory`` is relative to the config file.
        """
        f, filename = self._open()
        try:
            try:
                obj = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise LoaderError('invalid config file: %s' % e)
            if not isinstance(obj, dict):
                raise LoaderError('config file must hold a mapping')
            obj = dict(obj)

            if 'problems' in obj:
                self._register_problems(obj.pop('problems') or [])

            unknown = [k for k in obj if k.lower() not in env_options
                       and k.lower() != 'preset']
            if unknown:
                raise LoaderError('unknown config keys: %s' % ', '.join(
                    sorted(unknown)))

            preset = obj.pop('preset', 'default')
            directory = obj.pop('directory', None)
            env = Environment.from_preset(preset, **obj)

            # relative to the config file, if we know where it is
            if directory is not None:
                if filename:
                    directory = path.normpath(
                        path.join(path.dirname(filename), directory))
                env.directory = directory
            return env
        finally:
            f.close()


class InstanceLoader(object):
    """Loads a problem instance from the JSON file ``gen-instance``
    writes.
    """

    def __init__(self, filename):
        self.filename = filename

    def load_data(self):
        try:
            with open(self.filename) as f:
                return json.load(f)
        except (IOError, ValueError) as e:
            raise LoaderError('cannot read instance %s: %s' % (
                self.filename, e))

    def load_problem(self):
        """Returns ``(problem, E_opt)``; ``E_opt`` is ``None`` if the file
        does not record it."""
        data = self.load_data()
        try:
            problem = problem_from_dict(data)
        except (ArgumentError, KeyError, TypeError) as e:
            raise LoaderError('invalid instance %s: %s' % (self.filename, e))
        return problem, data.get('computed_E_opt')
