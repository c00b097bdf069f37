# Core modules package