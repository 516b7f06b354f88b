# Test module
