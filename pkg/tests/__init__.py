"""Tests for FSLCert."""
