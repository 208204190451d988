from setuptools import setup


# pull requirements
with open('requirements.txt') as f:
    requirements = f.read().splitlines()

# pull version
exec(open('limitstools/version.py').read())


setup(
    name='limitstools',
    version=__version__,
    packages=['limitstools'],
    install_requires=requirements,
    python_requires='>=3.9',
    scripts=['bin/limitstools'],
    classifiers=[
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering :: Information Analysis',
    ],
)
