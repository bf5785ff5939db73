"""
Validation of weight-system input files.

An input file is a JSON object with d, nu, L_max, resolution, p (list),
omega (flat list, row-major) and sigma (list of flat lists); p_total may
declare 1/p = sum 1/p_i for an extra consistency check.
"""
import json
import numbers

import numpy as np
from django import forms
from django.core.exceptions import ValidationError

from .exceptions import GridError
from .grid import GridConfig
from .weights import WeightSystem, validate


def _numbers(value, field, label):
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{label} must be a non-empty list of numbers", code='invalid')
    for index, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, numbers.Real):
            raise ValidationError(f"{label}[{index}] = {item!r} is not a number", code='invalid')
    return [float(item) for item in value]


class WeightFileForm(forms.Form):
    d = forms.IntegerField(min_value=1)
    nu = forms.IntegerField(min_value=2)
    L_max = forms.IntegerField(min_value=0)
    resolution = forms.IntegerField(min_value=1)
    p = forms.JSONField()
    p_total = forms.FloatField(required=False, min_value=0)
    omega = forms.JSONField()
    sigma = forms.JSONField()

    def clean_p(self):
        return _numbers(self.cleaned_data['p'], 'p', 'p')

    def clean_omega(self):
        return _numbers(self.cleaned_data['omega'], 'omega', 'omega')

    def clean_sigma(self):
        value = self.cleaned_data['sigma']
        if not isinstance(value, list) or not value:
            raise ValidationError("sigma must be a non-empty list of weights", code='invalid')
        return [_numbers(item, 'sigma', f'sigma[{index}]') for index, item in enumerate(value)]

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        d, nu, levels, resolution = cleaned['d'], cleaned['nu'], cleaned['L_max'], cleaned['resolution']
        if resolution == nu ** levels:
            shifted = False
        elif resolution == 3 * nu ** levels and nu == 2:
            shifted = True
        else:
            self.add_error('resolution', f"resolution must be nu^L_max = {nu ** levels} (or 3 * 2^L_max for shifted grids)")
            return cleaned

        cells = resolution ** d
        if len(cleaned['omega']) != cells:
            self.add_error('omega', f"Expected {cells} cells, got {len(cleaned['omega'])}")
        for index, sigma in enumerate(cleaned['sigma']):
            if len(sigma) != cells:
                self.add_error('sigma', f"sigma[{index}]: expected {cells} cells, got {len(sigma)}")
        if len(cleaned['sigma']) != len(cleaned['p']):
            self.add_error('sigma', f"{len(cleaned['sigma'])} sigma weights for {len(cleaned['p'])} exponents")
        if self.errors:
            return cleaned

        shape = (resolution,) * d
        try:
            grid = GridConfig(d=d, nu=nu, L_max=levels, shifted=shifted)
            self.system = WeightSystem.from_arrays(
                grid,
                np.reshape(cleaned['omega'], shape),
                [np.reshape(sigma, shape) for sigma in cleaned['sigma']],
                cleaned['p'],
                cleaned.get('p_total'),
            )
            self.report = validate(self.system)
        except GridError as exc:
            self.add_error(None, exc.message)
        except ValidationError as exc:
            for field, messages in exc.message_dict.items():
                name = 'sigma' if field.startswith('sigma') else field
                for message in messages:
                    self.add_error(name if name in self.fields else None, message)
        return cleaned


def read_payload(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError({'input': [f"Cannot read {path}: {exc}"]}) from exc


def system_from_payload(payload):
    if not isinstance(payload, dict):
        raise ValidationError({'input': ["The input must be a JSON object"]})
    form = WeightFileForm(data=payload)
    if not form.is_valid():
        raise ValidationError({field: list(errors) for field, errors in form.errors.items()})
    return form.system


def load_system(path):
    return system_from_payload(read_payload(path))


def payload_from_system(system):
    """Inverse of system_from_payload, used to save search results as input files."""
    return {
        'd': system.grid.d,
        'nu': system.grid.nu,
        'L_max': system.grid.L_max,
        'resolution': system.grid.resolution,
        'p': list(system.exponents.p_i),
        'omega': system.omega.density.ravel().tolist(),
        'sigma': [sigma.density.ravel().tolist() for sigma in system.sigmas],
    }
