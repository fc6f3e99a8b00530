from .sweeps import router as sweeps_router

__all__ = ['sweeps_router']
