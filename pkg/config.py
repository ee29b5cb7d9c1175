#!/usr/bin/env python3
"""
Configuration settings for the ncdomain toolkit
This file contains all tolerances, caps and defaults used by the library and CLI.
"""

import os
from typing import Dict, Any
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

class Config:
    """Main configuration class for the ncdomain toolkit"""

    # ===== REPORTS =====
    SCHEMA = 'ncdomain/1'
    DEFAULT_SEED = int(os.getenv('NCDOMAIN_SEED', '0'))

    # ===== LOGGING =====
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # ===== TRUNCATION =====
    DIM_CAP = int(os.getenv('NCDOMAIN_DIM_CAP', str(2 ** 20)))
    K_MAX = int(os.getenv('K_MAX', '200'))

    # ===== TOLERANCES =====
    PSD_REL_TOL = float(os.getenv('PSD_REL_TOL', '1e-9'))
    PURE_TOL = float(os.getenv('PURE_TOL', '1e-8'))
    FIXED_VECTOR_TOL = float(os.getenv('FIXED_VECTOR_TOL', '1e-8'))
    RANK_CUT = float(os.getenv('RANK_CUT', '1e-12'))
    BOUNDARY_BAND = float(os.getenv('BOUNDARY_BAND', '1e-10'))
    NODE_SEPARATION = float(os.getenv('NODE_SEPARATION', '1e-10'))
    BORDERLINE_RADIUS = float(os.getenv('BORDERLINE_RADIUS', '1e-3'))
    DIVERGENCE_LIMIT = float(os.getenv('DIVERGENCE_LIMIT', '1e12'))

    # ===== HEURISTICS =====
    PLATEAU_WINDOW = int(os.getenv('PLATEAU_WINDOW', '5'))
    PLATEAU_REL_TOL = float(os.getenv('PLATEAU_REL_TOL', '1e-3'))
    PLATEAU_ABS_TOL = float(os.getenv('PLATEAU_ABS_TOL', '1e-12'))
    BRANCH_BAND = float(os.getenv('BRANCH_BAND', '1e-9'))
    RADIUS_WINDOW = int(os.getenv('RADIUS_WINDOW', '3'))
    RADIUS_TOL = float(os.getenv('RADIUS_TOL', '0.05'))

    # Names accepted by --tol NAME=VALUE
    TOLERANCE_KEYS = (
        'PSD_REL_TOL', 'PURE_TOL', 'FIXED_VECTOR_TOL', 'RANK_CUT',
        'BOUNDARY_BAND', 'NODE_SEPARATION', 'BORDERLINE_RADIUS',
        'DIVERGENCE_LIMIT', 'PLATEAU_REL_TOL', 'PLATEAU_ABS_TOL',
        'BRANCH_BAND', 'RADIUS_TOL',
    )

    # ===== VALIDATION =====
    @classmethod
    def validate(cls):
        """Validate configuration"""
        errors = []

        if cls.DIM_CAP < 1:
            errors.append("NCDOMAIN_DIM_CAP must be positive")

        if cls.K_MAX < 1:
            errors.append("K_MAX must be at least 1")

        if cls.PLATEAU_WINDOW < 2:
            errors.append("PLATEAU_WINDOW must be at least 2")

        if cls.RADIUS_WINDOW < 1:
            errors.append("RADIUS_WINDOW must be at least 1")

        for key in cls.TOLERANCE_KEYS:
            if getattr(cls, key) <= 0:
                errors.append(f"{key} must be positive")

        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"LOG_LEVEL {cls.LOG_LEVEL!r} is not a logging level")

        if errors:
            raise ValueError(f"Configuration errors: {', '.join(errors)}")

        return True

    # ===== HELPER METHODS =====
    @classmethod
    def get_tolerances(cls) -> Dict[str, Any]:
        """Get every tolerance in effect, as embedded in reports"""
        values = {key.lower(): getattr(cls, key) for key in cls.TOLERANCE_KEYS}
        values.update({
            'k_max': cls.K_MAX,
            'dim_cap': cls.DIM_CAP,
            'plateau_window': cls.PLATEAU_WINDOW,
            'radius_window': cls.RADIUS_WINDOW,
        })
        return values

    @classmethod
    def apply_overrides(cls, overrides: Dict[str, str]) -> Dict[str, float]:
        """Apply NAME=VALUE tolerance overrides; unknown names are rejected"""
        applied = {}
        for raw_key, raw_value in overrides.items():
            key = raw_key.upper()
            if key not in cls.TOLERANCE_KEYS:
                raise KeyError(f"unknown tolerance {raw_key!r}")
            value = float(raw_value)
            if value <= 0:
                raise ValueError(f"tolerance {raw_key!r} must be positive")
            setattr(cls, key, value)
            applied[key.lower()] = value
        return applied

    @classmethod
    def get_plateau_config(cls) -> Dict[str, Any]:
        """Get curvature stopping-rule configuration"""
        return {
            'window': cls.PLATEAU_WINDOW,
            'rel_tol': cls.PLATEAU_REL_TOL,
            'abs_tol': cls.PLATEAU_ABS_TOL
        }
