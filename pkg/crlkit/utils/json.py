import json

import numpy as np


class SimpleJSONEncoder(json.JSONEncoder):
    """Knows about numpy scalars and arrays."""
    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        else:
            return super().default(obj)


def dump(obj, path):
    with open(path, "w") as fp:
        json.dump(obj, fp, cls=SimpleJSONEncoder, indent=2, sort_keys=True)


def load(path):
    with open(path) as fp:
        return json.load(fp)
