#!/usr/bin/env python

from setuptools import setup, find_packages

setup(name='PyBiLQR',
      version='1.0.0',
      description='Riccati-iteration LQR for complex-valued, antilinear and one-step delay discrete-time systems',
      author='Dr. Luyao ZOU',
      author_email='luyao.zou@univ-littoral.fr',
      packages=find_packages('.', exclude=('data.*', 'src.*')),
      entry_points={
        'console_scripts': [
            'pybilqr = PyBiLQR.launch:main',
        ]},
      package_data={'PyBiLQR': ['data/*.json']},
      install_requires=[
            'numpy>=1.22',
            'scipy>=1.8',
            'pandas>=1.4',
        ],
      python_requires='>=3.10',
      license='MIT',
)
