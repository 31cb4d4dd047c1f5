#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from __future__ import print_function, division
import json
import math
import numpy as np
from tqdm.notebook import tqdm as tqdm_notebook
from tqdm import tqdm as tqdm_classic


SCHEMA_VERSION = 1


def appendformat(filepath, form):
    """
    Append a format string to the end of a file path

    :Parameters:
        filepath : str
            File path of interest
        form : str
            File format of interest
    """

    format_string = '.'+form
    if filepath:
        if not filepath.endswith(format_string):
            filepath += format_string

    return filepath


def dictmerge(D, others):
    """
    Merge a dictionary with other dictionaries

    :Parameters:
        D : dict
            Main dictionary.
        others : list/tuple/dict
            Other dictionary or composite dictionarized elements.

    :Return:
        D : dict
            Merged dictionary.
    """

    if type(others) in (list, tuple): # Merge D with a list or tuple of dictionaries
        for oth in others:
            D = {**D, **oth}

    elif type(others) == dict: # Merge D with a single dictionary
        D = {**D, **others}

    return D


def tqdmenv(env):
    """ Choose tqdm progress bar executing environment.

    :Parameter:
        env : str
            Name of the environment, 'classic' for ordinary environment,
            'notebook' for Jupyter notebook.
    """

    if env == 'classic':
        tqdm = tqdm_classic
    elif env == 'notebook':
        tqdm = tqdm_notebook
    else:
        raise ValueError('Unknown progress bar environment ' + repr(env) + '!')

    return tqdm


def progress(iterable, pbar=False, pbenv='classic', **kwds):
    """ Wrap an iterable with a progress bar when requested.
    """

    if pbar:
        return tqdmenv(pbenv)(iterable, **kwds)
    return iterable


def parse_grid(text):
    """
    Parse a grid string of the form 'start:stop:steps' into an array.

    :Parameters:
        text : str/sequence
            Grid string with inclusive ends, or an explicit sequence of values.

    :Return:
        grid : 1D array
            Grid values.
    """

    if not isinstance(text, str):
        grid = np.asarray(text, dtype='float64').ravel()
        if grid.size == 0:
            raise ValueError('Empty grid!')
        return grid

    parts = text.split(':')
    if len(parts) != 3:
        raise ValueError('Grid string must read start:stop:steps, got ' + repr(text) + '!')
    try:
        start, stop = float(parts[0]), float(parts[1])
        steps = int(parts[2])
    except ValueError:
        raise ValueError('Grid string ' + repr(text) + ' is not numeric!')
    if steps < 1:
        raise ValueError('Grid needs at least one point!')
    if steps == 1:
        return np.array([start])

    return np.linspace(start, stop, steps)


def parse_vector(text, dim=None):
    """
    Parse a comma-separated vector, optionally checking its length.
    """

    if isinstance(text, str):
        try:
            vec = np.array([float(t) for t in text.split(',') if t.strip()])
        except ValueError:
            raise ValueError('Vector ' + repr(text) + ' is not numeric!')
    else:
        vec = np.asarray(text, dtype='float64').ravel()

    if dim is not None and vec.size != dim:
        raise ValueError('Vector ' + repr(text) + ' has ' + str(vec.size) +
                        ' components, expected ' + str(dim) + '!')

    return vec


def unit_vector(vec):
    """ Normalize a nonzero vector.
    """

    vec = np.asarray(vec, dtype='float64')
    nrm = np.linalg.norm(vec)
    if nrm == 0 or not np.isfinite(nrm):
        raise ValueError('Direction vector must be nonzero and finite!')

    return vec / nrm


def complex_records(values):
    """ Turn complex numbers into a list of {'re', 'im'} records.
    """

    return [{'re': float(np.real(z)), 'im': float(np.imag(z))} for z in np.ravel(values)]


def _jsonify(obj):

    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    elif isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    elif isinstance(obj, (complex, np.complexfloating)):
        return {'re': _jsonify(float(obj.real)), 'im': _jsonify(float(obj.imag))}
    elif isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    elif isinstance(obj, (int, np.integer)):
        return int(obj)
    elif isinstance(obj, (float, np.floating)):
        val = float(obj)
        if not math.isfinite(val):
            raise ValueError('Non-finite value in output!')
        return _Float17(val)

    return obj


class _Float17(float):
    """ Float rendered with 17 significant digits.
    """

    def __repr__(self):
        return '%.17g' % self


def _encode(obj, indent, level):

    pad = ' ' * (indent * (level + 1))
    end = ' ' * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [pad + json.dumps(k) + ': ' + _encode(v, indent, level + 1) for k, v in obj.items()]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    elif isinstance(obj, list):
        if not obj:
            return '[]'
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    elif isinstance(obj, _Float17):
        text = repr(obj)
        if text.lstrip('-').isdigit():
            text += '.0'
        return text

    return json.dumps(obj)


def dump_json(obj, path=None, indent=2):
    """
    Serialize results to JSON with 17 significant digits per float.

    :Parameters:
        obj : dict
            Result document; a 'schema_version' field is added if absent.
        path : str | None
            Output file; the text is returned when None.
        indent : int | 2
            Indentation width.

    :Return:
        text : str
            The JSON document.
    """

    if isinstance(obj, dict) and 'schema_version' not in obj:
        obj = dictmerge({'schema_version': SCHEMA_VERSION}, obj)
    text = _encode(_jsonify(obj), indent, 0) + '\n'

    if path is not None:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)

    return text


def random_vectors(n, count, seed=0, complex_valued=True):
    """
    Draw reproducible random coefficient vectors as the columns of an array.
    """

    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((n, count))
    if complex_valued:
        vecs = vecs + 1j*rng.standard_normal((n, count))

    return vecs


def loglog_slope(x, y):
    """ Least-squares slope of log(y) against log(x).
    """

    x, y = np.asarray(x, dtype='float64'), np.asarray(y, dtype='float64')
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        raise ValueError('Need at least two positive points to fit a slope!')

    return np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0]
