# type: ignore
from setuptools import setup

setup()
