import math
import os
from dotenv import load_dotenv
from typing import Dict, Any, List

# Load environment variables
load_dotenv()


def _int_list(raw: str) -> List[int]:
    return [int(item) for item in raw.split(',') if item.strip()]


class Config:
    """Base configuration class"""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_FILE = os.environ.get('LOG_FILE')
    REPORT_DIR = os.environ.get('REPORT_DIR', 'reports')
    THREADS = int(os.environ.get('CAPILLARY_THREADS', '4'))
    REPORT_SCHEMA_VERSION = '1.0'

    # Tolerance table; every verifier reads its threshold from here
    TOLERANCES: Dict[str, float] = {
        'identity': 1e-10,
        'finite_difference': 1e-6,
        'symfun_oracle': 1e-12,
        'ambient': 1e-10,
        'minkowski': 1e-6,
        'flux': 1e-6,
        'jacobi': 1e-5,
        'robin': 1e-5,
        'admissibility': 1e-8,
        'test_function': 1e-8,
        'gap': 1e-8,
        'cmc': 1e-8,
        'cap_reduction': 1e-4,
        'eigenvalue': 1e-5,
        'first_variation': 1e-6,
        'volume_rate': 1e-8,
        'flow_ledger': 1e-4,
        'frame': 1e-10,
        'support': 1e-10,
        'gauss': 1e-5,
    }
    MIN_ORDER = 2.0
    # Observed order of the second-order time stepping at finite dt
    FLOW_ORDER_SLACK = 0.25
    STRICT_GAP = 1e-4
    BASIS_DOUBLING_LIMIT = 0.05
    RESIDUAL_FLOOR = 1e-12
    # Roundoff per N^4 of the spectral second derivatives
    ROUNDOFF_FLOOR = 1e-14
    NORMALIZER_THRESHOLD = 1e-6

    # Default verification matrix
    DEFAULT_DIMENSIONS = _int_list(os.environ.get('CAPILLARY_DIMENSIONS', '2,3'))
    DEFAULT_THETAS = [math.pi / 3, math.pi / 2, 2 * math.pi / 3]
    DEFAULT_RESOLUTIONS = _int_list(os.environ.get('CAPILLARY_RESOLUTIONS', '16,32,64'))
    DEFAULT_LAMBDA = float(os.environ.get('CAPILLARY_LAMBDA', '1.0'))
    DEFAULT_HYPERBOLIC_LAMBDA = float(os.environ.get('CAPILLARY_HYPERBOLIC_LAMBDA', '2.0'))
    DEFAULT_BASIS_SIZE = int(os.environ.get('CAPILLARY_BASIS_SIZE', '12'))
    RANDOM_FIELDS = 20
    RANDOM_SEED = 20240601

    # Perturbed-cap defaults
    PERTURBATION_AMPLITUDE = 0.05
    PERTURBATION_MODE = 2

    # Flow and first-variation defaults
    FLOW_DT = 0.01
    FLOW_STEPS = 10
    VARIATION_STEP = 1e-3
    CFL_LIMIT = 0.1
    TANGENT_CUTOFF_POWER = 8

    # Finite-difference step for non-analytic patches (relative to patch scale)
    PATCH_FD_STEP = 1e-3


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False
    TESTING = False
    LOG_LEVEL = 'WARNING'


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    DEBUG = True
    DEFAULT_RESOLUTIONS = [12, 16, 24]
    DEFAULT_BASIS_SIZE = 8
    RANDOM_FIELDS = 5
    THREADS = 1


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(config_name: str = None) -> Config:
    """Get configuration based on environment"""
    if config_name is None:
        config_name = os.environ.get('CAPILLARY_ENV', 'default')
    return config.get(config_name, config['default'])


def tolerance(name: str, overrides: Dict[str, Any] = None) -> float:
    """Look up a tolerance, letting run-level overrides win"""
    if overrides and name in overrides:
        return float(overrides[name])
    return get_config().TOLERANCES[name]
