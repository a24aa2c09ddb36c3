"""
Initializer router for nmfbench.

Lists the registered initialization schemes.
"""

from typing import List

from fastapi import APIRouter

from nmfbench import schemas
from nmfbench.initializers import REGISTRY

router = APIRouter()


@router.get("/", response_model=List[schemas.InitOut])
def list_inits():
    """
    Retrieve every registered initializer.

    Returns:
        List[InitOut]: Name, family and randomized flag, sorted by name
    """
    return [REGISTRY[name].describe() for name in sorted(REGISTRY)]
