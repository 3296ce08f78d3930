"""Run manifests tie every output file of a command to the inputs that
produced it."""

import os
import json
import datetime


__all__ = ('RunManifest', 'MANIFEST_NAME')


MANIFEST_NAME = 'manifest.json'


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class RunManifest(object):
    """Stores what a command ran on in a JSON file.

    The file is named ``manifest.json`` and stored in the command's output
    directory. It records the command, the instance and config paths, the
    seeds, the output directory, start and finish timestamps and the
    package version.
    """

    def __init__(self, filename):
        self.filename = filename
        self._load_manifest()

    @classmethod
    def create(cls, directory, command, name=MANIFEST_NAME, **fields):
        from . import __version__
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        manifest = cls(os.path.join(directory, name))
        manifest.manifest = {
            'command': command,
            'output': os.path.abspath(directory),
            'version': __version__,
            'started': _now(),
        }
        manifest.manifest.update(fields)
        manifest._save_manifest()
        return manifest

    def __getitem__(self, key):
        return self.manifest[key]

    def __contains__(self, key):
        return key in self.manifest

    def remember(self, key, value):
        self.manifest[key] = value
        self._save_manifest()

    def finish(self, status=0):
        self.manifest['finished'] = _now()
        self.manifest['status'] = status
        self._save_manifest()

    def _load_manifest(self):
        if os.path.exists(self.filename):
            with open(self.filename, 'r') as f:
                self.manifest = json.load(f)
        else:
            self.manifest = {}

    def _save_manifest(self):
        with open(self.filename, 'w') as f:
            json.dump(self.manifest, f, indent=4, sort_keys=True)
