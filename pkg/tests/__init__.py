# Tests for dproc