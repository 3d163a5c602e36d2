"""Shared test configuration.

The suite works on small dense matrices where multithreaded BLAS loses
badly to a single thread; pin the pools so runtime bounds are stable.
"""

import threadpoolctl

threadpoolctl.threadpool_limits(1)
