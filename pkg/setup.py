from setuptools import setup, find_packages

setup(
    name='momentshape',
    version='0.1.0',
    description='Reconstruction of convex polygons with prescribed outer '
                'normals from Legendre moments',
    author='Viktor Csomor',
    license='MIT',
    install_requires=[
        'numpy>=1.21',
        'scipy>=1.7.0',
        'sympy>=1.6',
        'mpmath>=1.2.0',
        'mpi4py>=3.0.0',
    ],
    packages=find_packages(exclude=('tests', 'tests.*', 'examples')),
    entry_points={
        'console_scripts': ['momentshape=momentshape.cli:main'],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering',
        'Topic :: Scientific/Engineering :: Image Recognition',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    keywords=[
        'moments',
        'legendre moments',
        'shape reconstruction',
        'convex polygons',
        'support function',
        'inverse problems',
        'scientific computing',
    ],
    include_package_data=True)
