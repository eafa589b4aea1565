from .errors import *
from .schema import *
from .point_set import *
from .data_transfer_objects import *
