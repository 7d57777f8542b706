import os
import tempfile
from contextlib import contextmanager

from .log import get_logger

logger = get_logger(__name__)
USER_GROUP_PERMISSION = 0o775


def create_directory(path, mode=USER_GROUP_PERMISSION):
    if path and not os.path.exists(path):
        try:
            os.makedirs(path, mode=mode)
        except OSError as e:
            # another run may have created it in the meantime
            if not os.path.isdir(path):
                logger.error(e)
                raise


@contextmanager
def atomic_write(path, mode='w', encoding='utf-8'):
    """Yield a temp file next to `path`, renamed over it on success."""
    directory = os.path.dirname(os.path.abspath(path))
    create_directory(directory)
    fd, tmp_path = tempfile.mkstemp(
        prefix='.{}.'.format(os.path.basename(path)), dir=directory)
    kwargs = {} if 'b' in mode else {'encoding': encoding, 'newline': ''}
    try:
        with os.fdopen(fd, mode, **kwargs) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
