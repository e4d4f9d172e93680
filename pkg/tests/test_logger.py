import logging

from utils.logger import ROOT_LOGGER, get_logger, logger, setup_logger


class _Collect(logging.Handler):
    def __init__(self):
        super().__init__(logging.DEBUG)
        self.messages = []

    def emit(self, record):
        self.messages.append((record.name, record.getMessage()))


def test_service_loggers_reach_the_shared_logger():
    collector = _Collect()
    logger.addHandler(collector)
    try:
        get_logger('services.stability').warning('lowest eigenvalue below threshold')
    finally:
        logger.removeHandler(collector)
    assert collector.messages == [('capillary.services.stability', 'lowest eigenvalue below threshold')]


def test_setup_is_idempotent():
    again = setup_logger()
    assert again is logger
    assert again.name == ROOT_LOGGER
    assert len([h for h in again.handlers if isinstance(h, logging.StreamHandler)
                and not isinstance(h, logging.FileHandler)]) == 1


def test_file_handler(tmp_path):
    path = tmp_path / 'logs' / 'run.log'
    file_logger = setup_logger('capillary-file-test', log_file=str(path), level='debug')
    file_logger.debug('resolution 16 residual 1e-9')
    for handler in file_logger.handlers:
        handler.flush()
    assert 'resolution 16 residual 1e-9' in path.read_text(encoding='utf-8')
    for handler in list(file_logger.handlers):
        handler.close()
        file_logger.removeHandler(handler)
