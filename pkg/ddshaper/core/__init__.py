from ddshaper.core.config import *
from ddshaper.core.errors import *
from ddshaper.core.signal import *
