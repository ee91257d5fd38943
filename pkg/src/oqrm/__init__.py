"""Open quantum Rabi model: Kibble-Zurek simulation and analysis toolkit."""
__version__ = "0.1.0"
