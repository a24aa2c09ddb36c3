"""
Database configuration module for the nmfbench results store.

This module sets up the SQLAlchemy engine and session factory for stored
benchmark runs, and provides the session dependency used by the FastAPI
routers.
"""

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from nmfbench.config import get_settings

DATABASE_URL = get_settings().database_url

# SQLite connections are shared between the request threads of the service
connect_args = {"check_same_thread": False} if DATABASE_URL.startswith("sqlite") else {}
engine = create_engine(DATABASE_URL, connect_args=connect_args)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def init_db(bind=engine) -> None:
    """Create the tables of every model that does not exist yet."""
    from nmfbench import models  # noqa: F401  registers the tables

    Base.metadata.create_all(bind=bind)


def get_db():
    """
    Dependency function to provide a database session to FastAPI endpoints.

    Yields:
        Session: SQLAlchemy database session, closed after the request.
    """
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
