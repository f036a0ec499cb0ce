from setuptools import setup, find_packages

setup(
    name='universal_sets',
    version='0.0.1',
    packages=find_packages(include=['universal_sets',
                                    'universal_sets.*']),
    install_requires=['numpy', 'pandas', 'scipy', 'pyyaml', 'schema', 'sympy', 'mpmath'],
    entry_points={
        'console_scripts': ['universal_sets=universal_sets.driver:main'],
    },
    url='',
    license='MIT',
    description='Exact arithmetic for universal and optimal sets, generalized factorials '
                'and Euler-Kronecker estimates in quadratic fields'
)
