"""
Main application module for the nmfbench service.

This module creates the FastAPI application, makes sure the results store
has its tables, and includes the initializer and run routers.
"""

from fastapi import FastAPI

from nmfbench import database
from nmfbench.routers import inits, runs

database.init_db()

app = FastAPI(title="nmfbench")

# Registered initialization schemes
app.include_router(inits.router, prefix="/inits", tags=["Initializers"])

# Benchmark execution and stored results
app.include_router(runs.router, prefix="/runs", tags=["Runs"])


@app.get("/", tags=["Root"])
def root():
    """
    Root endpoint that returns a welcome message.

    Returns:
        dict: A dictionary containing a welcome message.
    """
    return {"message": "Welcome to the nmfbench API"}
